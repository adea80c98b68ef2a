//! On-disk BRIR bank: one float-32 multichannel WAV per entry plus a JSON
//! index.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ArrayPose, Brir, Room};
use crate::dsp::wav::read_wav;
use crate::util::{read_json, rng, write_json};
use crate::{Error, Result};

pub const BANK_INDEX_FILE: &str = "index.json";

/// How far from the array a source is placed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceSpec {
    /// Absolute distance in metres.
    Meters(f64),
    /// Fraction of the distance between the array and the wall in the source
    /// direction.
    WallFraction(f64),
}

impl DistanceSpec {
    pub fn label(&self) -> String {
        match self {
            DistanceSpec::Meters(m) => format!("{m}m"),
            DistanceSpec::WallFraction(f) => format!("{}%", (f * 100.0).round()),
        }
    }

    /// Metres, when the condition is absolute.
    pub fn meters(&self) -> Option<f64> {
        match self {
            DistanceSpec::Meters(m) => Some(*m),
            DistanceSpec::WallFraction(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrirBankEntry {
    pub id: String,
    pub room: String,
    pub pose: usize,
    /// Head-relative source azimuth.
    pub azimuth_deg: f64,
    pub distance_m: f64,
    pub distance: DistanceSpec,
    pub wav: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrirBankIndex {
    pub config_hash: String,
    pub hrir_fingerprint: String,
    pub entries: Vec<BrirBankEntry>,
}

/// One BRIR to render, before it exists on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct BankPlanItem {
    pub room: Room,
    pub pose_index: usize,
    pub pose: ArrayPose,
    pub azimuth_deg: f64,
    pub distance: DistanceSpec,
    pub source_m: [f64; 3],
}

/// `n` listener poses inside `room`, seeded. Heads keep at least 0.5 m (or a
/// quarter of the room dimension) from the side walls, ear height between
/// 1.0 and 1.8 m, yaw on the 5 degree grid.
pub fn generate_poses(room: &Room, n: usize, seed: u64) -> Vec<ArrayPose> {
    let mut rng = rng(seed);
    let [lx, ly, lz] = room.dimensions_m;
    let mx = (0.25 * lx).min(0.5);
    let my = (0.25 * ly).min(0.5);
    let z_hi = 1.8_f64.min(lz - super::MIN_WALL_CLEARANCE_M);
    let z_lo = 1.0_f64.min(z_hi);
    (0..n)
        .map(|_| {
            let x = rng.random_range(mx..=lx - mx);
            let y = rng.random_range(my..=ly - my);
            let z = if z_hi > z_lo {
                rng.random_range(z_lo..=z_hi)
            } else {
                z_lo
            };
            let yaw = f64::from(rng.random_range(0..72u32)) * 5.0;
            ArrayPose {
                head_center_m: [x, y, z],
                yaw_deg: yaw,
            }
        })
        .collect()
}

/// Room-frame position of a source at head-relative azimuth `azimuth_deg`
/// (ear height), or `None` when it would leave the room.
pub fn resolve_source_position(
    room: &Room,
    pose: &ArrayPose,
    azimuth_deg: f64,
    distance: DistanceSpec,
) -> Option<[f64; 3]> {
    let a = azimuth_deg.to_radians();
    let dir = pose.to_room_frame([a.cos(), a.sin(), 0.0]);
    let head = pose.head_center_m;
    let d = match distance {
        DistanceSpec::Meters(m) => m,
        DistanceSpec::WallFraction(f) => {
            // distance to the first wall hit along `dir`
            let mut t = f64::INFINITY;
            for axis in 0..2 {
                if dir[axis] > 1e-12 {
                    t = t.min((room.dimensions_m[axis] - head[axis]) / dir[axis]);
                } else if dir[axis] < -1e-12 {
                    t = t.min(-head[axis] / dir[axis]);
                }
            }
            f * t
        }
    };
    let p = [head[0] + d * dir[0], head[1] + d * dir[1], head[2]];
    const MARGIN: f64 = 0.05;
    room.contains(p, MARGIN).then_some(p)
}

/// Opened bank: the index plus lazy access to the WAVs.
#[derive(Debug, Clone)]
pub struct BrirBank {
    root: PathBuf,
    index: BrirBankIndex,
}

impl BrirBank {
    pub fn open(root: &Path) -> Result<Self> {
        let index: BrirBankIndex = read_json(&root.join(BANK_INDEX_FILE))?;
        Ok(Self {
            root: root.to_path_buf(),
            index,
        })
    }

    pub fn from_index(root: &Path, index: BrirBankIndex) -> Self {
        Self {
            root: root.to_path_buf(),
            index,
        }
    }

    pub fn write_index(&self) -> Result<()> {
        write_json(&self.root.join(BANK_INDEX_FILE), &self.index)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn index(&self) -> &BrirBankIndex {
        &self.index
    }

    pub fn entries(&self) -> &[BrirBankEntry] {
        &self.index.entries
    }

    pub fn load(&self, entry: &BrirBankEntry) -> Result<Brir> {
        let ir = read_wav(&self.root.join(&entry.wav))?;
        Ok(Brir {
            ir,
            source_azimuth_room_deg: f64::NAN,
            source_azimuth_head_deg: entry.azimuth_deg,
            source_distance_m: entry.distance_m,
            room_id: entry.room.clone(),
        })
    }

    /// Loads the selected entries into memory, keyed by id.
    pub fn load_many<'a>(
        &self,
        entries: impl IntoIterator<Item = &'a BrirBankEntry>,
    ) -> Result<HashMap<String, Arc<Brir>>> {
        let mut out = HashMap::new();
        for e in entries {
            if !out.contains_key(&e.id) {
                out.insert(e.id.clone(), Arc::new(self.load(e)?));
            }
        }
        Ok(out)
    }

    pub fn find(&self, id: &str) -> Result<&BrirBankEntry> {
        self.index
            .entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::Coverage(format!("BRIR {id} not in bank")))
    }
}
