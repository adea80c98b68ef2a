//! Network input features: per microphone and bin, the sine and cosine of the
//! STFT phase plus the magnitude normalised by its mean over microphones.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::{stft, MultichannelAudio, Spectrogram, StftConfig};
use crate::util::{read_json, write_bytes, write_json};
use crate::{Error, Result, N_MICS};

/// Features per (channel, bin): sin, cos, normalised magnitude.
pub const N_FEATURES: usize = 3;

/// Frames per 2 s segment fed to the network.
pub const SEGMENT_FRAMES: usize = 200;

/// `[frame][feature][channel][bin]`, row-major, single precision.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    data: Vec<f32>,
    n_frames: usize,
    n_channels: usize,
    n_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSidecar {
    /// Always `[n_frames, 3, n_channels, n_bins]`.
    pub shape: [usize; 4],
    pub dtype: String,
}

impl FeatureTensor {
    pub fn from_parts(
        data: Vec<f32>,
        n_frames: usize,
        n_channels: usize,
        n_bins: usize,
    ) -> Result<Self> {
        if data.len() != n_frames * N_FEATURES * n_channels * n_bins {
            return Err(Error::ShapeMismatch(format!(
                "{} values for shape [{n_frames}, 3, {n_channels}, {n_bins}]",
                data.len()
            )));
        }
        Ok(Self {
            data,
            n_frames,
            n_channels,
            n_bins,
        })
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.n_frames, N_FEATURES, self.n_channels, self.n_bins]
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn get(&self, frame: usize, feature: usize, channel: usize, bin: usize) -> f32 {
        self.data[self.offset(frame, feature, channel, bin)]
    }

    fn offset(&self, frame: usize, feature: usize, channel: usize, bin: usize) -> usize {
        ((frame * N_FEATURES + feature) * self.n_channels + channel) * self.n_bins + bin
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    /// Keeps the first `n` frames, zero-padding (with the zero-bin values)
    /// when there are fewer.
    pub fn with_frames(mut self, n: usize) -> Self {
        let per_frame = N_FEATURES * self.n_channels * self.n_bins;
        if n <= self.n_frames {
            self.data.truncate(n * per_frame);
        } else {
            let pad = zero_frame(self.n_channels, self.n_bins);
            for _ in self.n_frames..n {
                self.data.extend_from_slice(&pad);
            }
        }
        self.n_frames = n;
        self
    }
}

fn zero_frame(n_channels: usize, n_bins: usize) -> Vec<f32> {
    let plane = n_channels * n_bins;
    let mut v = vec![0.0; N_FEATURES * plane];
    v[plane..].fill(1.0);
    v
}

/// Phase and normalised-magnitude features of a six-channel spectrogram.
///
/// A zero bin has phase 0 (sin 0, cos 1). When all channels of a bin are zero
/// the normalised magnitudes are 1.
pub fn extract_features(spec: &Spectrogram) -> Result<FeatureTensor> {
    if spec.n_channels() != N_MICS {
        return Err(Error::ShapeMismatch(format!(
            "features need {N_MICS} channels, got {}",
            spec.n_channels()
        )));
    }
    let (n_ch, n_bins, n_frames) = (spec.n_channels(), spec.n_bins(), spec.n_frames());
    let per_frame = N_FEATURES * n_ch * n_bins;
    let mut data = vec![0f32; n_frames * per_frame];
    data.par_chunks_mut(per_frame)
        .enumerate()
        .for_each(|(m, out)| {
            let mut mags = vec![0.0f64; n_ch];
            for k in 0..n_bins {
                for (c, mag) in mags.iter_mut().enumerate() {
                    let y = spec.get(c, m, k);
                    let a = y.norm();
                    *mag = a;
                    let (s, co) = if a > 0.0 {
                        (y.im / a, y.re / a)
                    } else {
                        (0.0, 1.0)
                    };
                    out[c * n_bins + k] = s as f32;
                    out[(n_ch + c) * n_bins + k] = co as f32;
                }
                let mean = mags.iter().sum::<f64>() / n_ch as f64;
                for (c, &a) in mags.iter().enumerate() {
                    let v = if mean > 0.0 { a / mean } else { 1.0 };
                    out[(2 * n_ch + c) * n_bins + k] = v as f32;
                }
            }
        });
    FeatureTensor::from_parts(data, n_frames, n_ch, n_bins)
}

/// STFT plus features, standardised to `round(n_samples / hop)` frames
/// (200 for 2 s at 16 kHz). The tail is zero-padded so the last frames exist.
pub fn features_of_segment(
    audio: &MultichannelAudio,
    config: &StftConfig,
) -> Result<FeatureTensor> {
    let target = segment_frames(audio.n_samples(), config);
    let needed = config.samples_for_frames(target).max(audio.n_samples());
    let spec = stft(&audio.resized(needed), config)?;
    Ok(extract_features(&spec)?.with_frames(target))
}

/// Standard frame count for a segment of `n_samples`.
pub fn segment_frames(n_samples: usize, config: &StftConfig) -> usize {
    (n_samples as f64 / config.hop_size as f64).round() as usize
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Little-endian `f32` values at `path`, shape in `path.json`.
pub fn write_feature_cache(path: &Path, features: &FeatureTensor) -> Result<()> {
    let bytes: Vec<u8> = features.data.iter().flat_map(|v| v.to_le_bytes()).collect();
    write_bytes(path, &bytes)?;
    write_json(
        &sidecar_path(path),
        &FeatureSidecar {
            shape: features.shape(),
            dtype: "float32".into(),
        },
    )
}

pub fn read_feature_cache(path: &Path) -> Result<FeatureTensor> {
    let side: FeatureSidecar = read_json(&sidecar_path(path))?;
    if side.dtype != "float32" || side.shape[1] != N_FEATURES {
        return Err(Error::Dataset(format!(
            "{}: unsupported feature layout",
            path.display()
        )));
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Dataset(format!(
            "{}: truncated feature file",
            path.display()
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    let [f, _, c, k] = side.shape;
    FeatureTensor::from_parts(data, f, c, k)
        .map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))
}
