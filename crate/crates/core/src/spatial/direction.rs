use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// A direction in head coordinates. Azimuth 0 is straight ahead and increases
/// counter-clockwise seen from above (90 = left); elevation is positive
/// upwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

/// Wraps an azimuth into [0, 360).
pub fn normalize_azimuth(az: f64) -> f64 {
    let a = az.rem_euclid(360.0);
    if a >= 360.0 {
        0.0
    } else {
        a
    }
}

impl Direction {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Self {
        Self {
            azimuth_deg: normalize_azimuth(azimuth_deg),
            elevation_deg: elevation_deg.clamp(-90.0, 90.0),
        }
    }

    pub fn horizontal(azimuth_deg: f64) -> Self {
        Self::new(azimuth_deg, 0.0)
    }

    /// Direction of a Cartesian vector (x front, y left, z up).
    pub fn from_vector(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let az = v[1].atan2(v[0]).to_degrees();
        let el = if r > 0.0 {
            (v[2] / r).clamp(-1.0, 1.0).asin().to_degrees()
        } else {
            0.0
        };
        Self::new(az, el)
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let az = self.azimuth_deg.to_radians();
        let el = self.elevation_deg.to_radians();
        [el.cos() * az.cos(), el.cos() * az.sin(), el.sin()]
    }

    /// Great-circle angle to `other`, in radians.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        angle_between(&self.unit_vector(), &other.unit_vector())
    }

    /// Mirror image across the median plane (azimuth -> 360 - azimuth).
    pub fn mirrored(&self) -> Self {
        Self::new(-self.azimuth_deg, self.elevation_deg)
    }
}

/// Angle between two unit vectors, in radians.
pub(crate) fn angle_between(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    sin.atan2(cos)
}

/// Horizontal-plane grid starting at azimuth 0 with the given spacing.
pub fn horizontal_grid(step_deg: f64) -> Vec<Direction> {
    let n = (360.0 / step_deg).round() as usize;
    (0..n)
        .map(|i| Direction::horizontal(i as f64 * step_deg))
        .collect()
}

/// Quasi-uniform points on the sphere (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<Direction> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let az = (golden * i as f64).to_degrees();
            Direction::new(az, z.asin().to_degrees())
        })
        .collect()
}
