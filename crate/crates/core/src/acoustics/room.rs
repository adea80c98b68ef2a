use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Minimum distance between the head centre and any wall.
pub const MIN_WALL_CLEARANCE_M: f64 = 0.2;

/// A shoebox room described by its dimensions and reverberation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomSpec {
    pub id: String,
    pub dimensions_m: [f64; 3],
    pub t60_s: f64,
}

impl RoomSpec {
    pub fn new(id: impl Into<String>, dimensions_m: [f64; 3], t60_s: f64) -> Self {
        Self {
            id: id.into(),
            dimensions_m,
            t60_s,
        }
    }

    pub fn volume(&self) -> f64 {
        self.dimensions_m.iter().product()
    }

    pub fn surface(&self) -> f64 {
        let [x, y, z] = self.dimensions_m;
        2.0 * (x * y + x * z + y * z)
    }

    pub fn validate(&self) -> Result<()> {
        if self
            .dimensions_m
            .iter()
            .any(|d| !(*d > 0.0) || !d.is_finite())
        {
            return Err(Error::invalid(format!(
                "room {} has non-positive dimensions {:?}",
                self.id, self.dimensions_m
            )));
        }
        t60_to_absorption(self).map(|_| ())
    }
}

/// Sabine inversion: uniform absorption `0.161 V / (S T60)`.
pub fn t60_to_absorption(room: &RoomSpec) -> Result<f64> {
    if !(room.t60_s > 0.0) {
        return Err(Error::invalid(format!(
            "T60 must be positive, got {}",
            room.t60_s
        )));
    }
    let alpha = 0.161 * room.volume() / (room.surface() * room.t60_s);
    if alpha > 1.0 {
        return Err(Error::UnattainableT60 {
            t60_s: room.t60_s,
            absorption: alpha,
        });
    }
    Ok(alpha)
}

/// Eyring inversion: `1 - exp(-0.161 V / (S T60))`. Rooms must still pass the
/// Sabine attainability check.
pub fn t60_to_absorption_eyring(room: &RoomSpec) -> Result<f64> {
    let sabine = t60_to_absorption(room)?;
    Ok(1.0 - (-sabine).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbsorptionModel {
    #[default]
    Sabine,
    Eyring,
}

/// A room ready for simulation: dimensions plus uniform wall absorption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub id: String,
    pub dimensions_m: [f64; 3],
    pub absorption: f64,
    /// Nominal reverberation time, when the room came from a [`RoomSpec`].
    pub t60_s: Option<f64>,
}

impl Room {
    pub fn from_spec(spec: &RoomSpec, model: AbsorptionModel) -> Result<Self> {
        spec.validate()?;
        let absorption = match model {
            AbsorptionModel::Sabine => t60_to_absorption(spec)?,
            AbsorptionModel::Eyring => t60_to_absorption_eyring(spec)?,
        };
        Ok(Self {
            id: spec.id.clone(),
            dimensions_m: spec.dimensions_m,
            absorption,
            t60_s: Some(spec.t60_s),
        })
    }

    /// Fully absorbing walls: only the direct path survives.
    pub fn anechoic(id: impl Into<String>, dimensions_m: [f64; 3]) -> Self {
        Self {
            id: id.into(),
            dimensions_m,
            absorption: 1.0,
            t60_s: None,
        }
    }

    pub fn with_absorption(
        id: impl Into<String>,
        dimensions_m: [f64; 3],
        absorption: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&absorption) || absorption == 0.0 {
            return Err(Error::invalid(format!(
                "absorption {absorption} not in (0, 1]"
            )));
        }
        Ok(Self {
            id: id.into(),
            dimensions_m,
            absorption,
            t60_s: None,
        })
    }

    /// Amplitude reflection coefficient per wall bounce.
    pub fn reflection_coefficient(&self) -> f64 {
        (1.0 - self.absorption).max(0.0).sqrt()
    }

    pub fn contains(&self, p: [f64; 3], margin: f64) -> bool {
        p.iter()
            .zip(&self.dimensions_m)
            .all(|(x, l)| *x >= margin && *x <= l - margin)
    }
}

/// Listener placement: head centre in room coordinates and the yaw of the
/// head's frontal direction (degrees, counter-clockwise from +x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayPose {
    pub head_center_m: [f64; 3],
    pub yaw_deg: f64,
}

impl ArrayPose {
    pub fn validate(&self, room: &Room) -> Result<()> {
        if !room.contains(self.head_center_m, MIN_WALL_CLEARANCE_M) {
            return Err(Error::invalid(format!(
                "head position {:?} needs {MIN_WALL_CLEARANCE_M} m clearance inside room {}",
                self.head_center_m, room.id
            )));
        }
        Ok(())
    }

    /// Expresses a room-frame vector in head coordinates.
    pub fn to_head_frame(&self, v: [f64; 3]) -> [f64; 3] {
        let (s, c) = (-self.yaw_deg).to_radians().sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
    }

    /// Expresses a head-frame vector in room coordinates.
    pub fn to_room_frame(&self, v: [f64; 3]) -> [f64; 3] {
        let (s, c) = self.yaw_deg.to_radians().sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
    }
}
