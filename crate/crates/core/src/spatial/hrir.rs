use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::direction::angle_between;
use super::Direction;
use crate::dsp::wav::{read_wav, write_wav, WavEncoding};
use crate::dsp::MultichannelAudio;
use crate::util::{read_json, write_json};
use crate::{Error, Result};

/// Channel order of the binaural BTE array.
pub const BTE_CHANNEL_NAMES: [&str; 6] = ["L_Fr", "L_Mid", "L_Rear", "R_Fr", "R_Mid", "R_Rear"];

/// Angular tolerance (radians) under which two directions count as equal.
const SAME_DIRECTION_RAD: f64 = 1e-8;

/// On-disk description of an HRIR set: one multichannel float WAV per
/// direction, paths relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrirManifest {
    pub sample_rate_hz: u32,
    pub reference_distance_m: f64,
    pub channels: Vec<String>,
    pub entries: Vec<HrirEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrirEntry {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub wav: String,
}

/// A directional grid of multichannel head/device impulse responses.
#[derive(Debug, Clone, PartialEq)]
pub struct HrirSet {
    directions: Vec<Direction>,
    unit_vectors: Vec<[f64; 3]>,
    /// `[direction][channel][tap]`, flattened.
    data: Vec<f64>,
    n_channels: usize,
    ir_length: usize,
    sample_rate_hz: u32,
    reference_distance_m: f64,
    channel_names: Vec<String>,
}

impl HrirSet {
    /// `impulse_responses[d][c]` is the response of channel `c` to direction `d`.
    pub fn new(
        directions: Vec<Direction>,
        impulse_responses: Vec<Vec<Vec<f64>>>,
        sample_rate_hz: u32,
        reference_distance_m: f64,
        channel_names: Vec<String>,
    ) -> Result<Self> {
        if directions.len() != impulse_responses.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} directions but {} impulse responses",
                directions.len(),
                impulse_responses.len()
            )));
        }
        if !(reference_distance_m > 0.0) {
            return Err(Error::invalid("reference distance must be positive"));
        }
        let n_channels = channel_names.len();
        let ir_length = impulse_responses
            .first()
            .and_then(|d| d.first())
            .map_or(0, Vec::len);
        for (i, d) in directions.iter().enumerate() {
            if directions[..i]
                .iter()
                .any(|o| o.angle_to(d) < SAME_DIRECTION_RAD)
            {
                return Err(Error::DuplicateDirection {
                    azimuth_deg: d.azimuth_deg,
                    elevation_deg: d.elevation_deg,
                });
            }
        }
        let mut data = Vec::with_capacity(directions.len() * n_channels * ir_length);
        for irs in &impulse_responses {
            if irs.len() != n_channels {
                return Err(Error::ShapeMismatch(format!(
                    "expected {n_channels} channels per direction, got {}",
                    irs.len()
                )));
            }
            for ir in irs {
                if ir.len() != ir_length {
                    return Err(Error::ShapeMismatch(
                        "all impulse responses must have the same length".into(),
                    ));
                }
                data.extend_from_slice(ir);
            }
        }
        Ok(Self {
            unit_vectors: directions.iter().map(Direction::unit_vector).collect(),
            directions,
            data,
            n_channels,
            ir_length,
            sample_rate_hz,
            reference_distance_m,
            channel_names,
        })
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn ir_length(&self) -> usize {
        self.ir_length
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn reference_distance_m(&self) -> f64 {
        self.reference_distance_m
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn ir(&self, direction: usize, channel: usize) -> &[f64] {
        let start = (direction * self.n_channels + channel) * self.ir_length;
        &self.data[start..start + self.ir_length]
    }

    /// All channels of one direction as a multichannel signal.
    pub fn direction_audio(&self, direction: usize) -> MultichannelAudio {
        let channels = (0..self.n_channels)
            .map(|c| self.ir(direction, c).to_vec())
            .collect();
        MultichannelAudio::new(channels, self.sample_rate_hz).expect("validated on construction")
    }

    /// Nearest grid direction to a (not necessarily normalised) head-frame
    /// vector; ties go to the lowest index.
    pub fn nearest_to_vector(&self, v: [f64; 3]) -> usize {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let u = if n > 0.0 {
            [v[0] / n, v[1] / n, v[2] / n]
        } else {
            [1.0, 0.0, 0.0]
        };
        let mut best = 0;
        let mut best_angle = f64::INFINITY;
        for (i, g) in self.unit_vectors.iter().enumerate() {
            let a = angle_between(g, &u);
            if a < best_angle - 1e-12 {
                best = i;
                best_angle = a;
            }
        }
        best
    }

    /// Index of an exact grid point (within 1e-6 degrees), if present.
    pub fn find(&self, query: &Direction) -> Option<usize> {
        let tol = 1e-6_f64.to_radians();
        self.directions
            .iter()
            .position(|d| d.angle_to(query) <= tol)
    }

    /// Returns a copy with every impulse response multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            data: self.data.iter().map(|x| x * gain).collect(),
            ..self.clone()
        }
    }

    /// Stable identifier of the set's contents.
    pub fn fingerprint(&self) -> String {
        let mut bytes = Vec::with_capacity(self.data.len() * 8 + 64);
        bytes.extend_from_slice(&self.sample_rate_hz.to_le_bytes());
        bytes.extend_from_slice(&self.reference_distance_m.to_le_bytes());
        for d in &self.directions {
            bytes.extend_from_slice(&d.azimuth_deg.to_le_bytes());
            bytes.extend_from_slice(&d.elevation_deg.to_le_bytes());
        }
        for x in &self.data {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
        crate::util::sha256_hex(&bytes)
    }

    /// Loads a set from its JSON manifest, validating rates, channel counts,
    /// lengths and direction uniqueness.
    pub fn load(manifest_path: &Path) -> Result<Self> {
        let manifest: HrirManifest = read_json(manifest_path)?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        let mut seen = BTreeSet::new();
        let mut directions = Vec::with_capacity(manifest.entries.len());
        let mut irs = Vec::with_capacity(manifest.entries.len());
        for entry in &manifest.entries {
            let dir = Direction::new(entry.azimuth_deg, entry.elevation_deg);
            let key = (
                (dir.azimuth_deg * 1e6).round() as i64,
                (dir.elevation_deg * 1e6).round() as i64,
            );
            if !seen.insert(key) {
                return Err(Error::DuplicateDirection {
                    azimuth_deg: dir.azimuth_deg,
                    elevation_deg: dir.elevation_deg,
                });
            }
            let path: PathBuf = base.join(&entry.wav);
            let audio = read_wav(&path)?;
            if audio.sample_rate_hz() != manifest.sample_rate_hz {
                return Err(Error::RateMismatch {
                    path,
                    expected: manifest.sample_rate_hz,
                    found: audio.sample_rate_hz(),
                });
            }
            if audio.n_channels() != manifest.channels.len() {
                return Err(Error::ChannelMismatch {
                    path,
                    expected: manifest.channels.len(),
                    found: audio.n_channels(),
                });
            }
            directions.push(dir);
            irs.push(audio.into_channels());
        }
        Self::new(
            directions,
            irs,
            manifest.sample_rate_hz,
            manifest.reference_distance_m,
            manifest.channels,
        )
    }

    /// Writes the set as `manifest.json` plus one float WAV per direction into
    /// `dir`, returning the manifest path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let mut entries = Vec::with_capacity(self.len());
        for (i, d) in self.directions.iter().enumerate() {
            let wav = format!("hrir_{i:04}.wav");
            write_wav(
                &dir.join(&wav),
                &self.direction_audio(i),
                WavEncoding::Float32,
            )?;
            entries.push(HrirEntry {
                azimuth_deg: d.azimuth_deg,
                elevation_deg: d.elevation_deg,
                wav,
            });
        }
        let manifest = HrirManifest {
            sample_rate_hz: self.sample_rate_hz,
            reference_distance_m: self.reference_distance_m,
            channels: self.channel_names.clone(),
            entries,
        };
        let path = dir.join("manifest.json");
        write_json(&path, &manifest)?;
        Ok(path)
    }
}

/// Index of the grid direction with the smallest great-circle distance to
/// `query`; ties go to the lowest index.
pub fn nearest_direction(set: &HrirSet, query: &Direction) -> usize {
    set.nearest_to_vector(query.unit_vector())
}
