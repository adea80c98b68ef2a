use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsp::StftConfig;
use crate::spatial::normalize_azimuth;
use crate::util::{read_json, write_bytes, write_json};
use crate::{Error, Result};

/// Azimuth sectors of 5 degrees.
pub const N_CLASSES: usize = 72;

/// Class index of an azimuth: nearest 5 degree sector, wrapping at 360.
pub fn azimuth_class(azimuth_deg: f64) -> usize {
    let az = normalize_azimuth(azimuth_deg);
    ((az / 5.0).round() as usize) % N_CLASSES
}

/// Frame-level multi-hot DOA targets, `[frame][class]` with values 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoaLabelGrid {
    n_frames: usize,
    data: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSidecar {
    pub n_frames: usize,
    pub classes: usize,
}

impl DoaLabelGrid {
    pub fn zeros(n_frames: usize) -> Self {
        Self {
            n_frames,
            data: vec![0; n_frames * N_CLASSES],
        }
    }

    pub fn from_rows(data: Vec<u8>, n_frames: usize) -> Result<Self> {
        if data.len() != n_frames * N_CLASSES {
            return Err(Error::ShapeMismatch(format!(
                "label data has {} values, expected {n_frames} x {N_CLASSES}",
                data.len()
            )));
        }
        if data.iter().any(|&v| v > 1) {
            return Err(Error::invalid("labels must be 0 or 1"));
        }
        Ok(Self { n_frames, data })
    }

    /// Labels for sources active over sample ranges `[start, end)`.
    ///
    /// Frame `f` spans `[f * hop, f * hop + window)`; a source is marked in it
    /// when it is active for at least half the window.
    pub fn from_activity(
        active: &[(usize, usize, usize)],
        n_frames: usize,
        stft: &StftConfig,
    ) -> Result<Self> {
        let mut grid = Self::zeros(n_frames);
        let win = stft.window_size;
        for &(start, end, class) in active {
            if class >= N_CLASSES {
                return Err(Error::invalid(format!("class {class} out of range")));
            }
            for f in 0..n_frames {
                let lo = f * stft.hop_size;
                let hi = lo + win;
                let overlap = end.min(hi).saturating_sub(start.max(lo));
                if 2 * overlap >= win {
                    grid.set(f, class);
                }
            }
        }
        Ok(grid)
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn set(&mut self, frame: usize, class: usize) {
        self.data[frame * N_CLASSES + class] = 1;
    }

    pub fn get(&self, frame: usize, class: usize) -> bool {
        self.data[frame * N_CLASSES + class] != 0
    }

    pub fn frame(&self, frame: usize) -> &[u8] {
        &self.data[frame * N_CLASSES..(frame + 1) * N_CLASSES]
    }

    /// Active classes of one frame, ascending.
    pub fn active(&self, frame: usize) -> Vec<usize> {
        (0..N_CLASSES).filter(|&c| self.get(frame, c)).collect()
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Writes raw `u8` rows to `path` and the shape to `path.json`.
pub fn write_labels(path: &Path, labels: &DoaLabelGrid) -> Result<()> {
    write_bytes(path, labels.as_bytes())?;
    write_json(
        &sidecar_path(path),
        &LabelSidecar {
            n_frames: labels.n_frames,
            classes: N_CLASSES,
        },
    )
}

pub fn read_labels(path: &Path) -> Result<DoaLabelGrid> {
    let side: LabelSidecar = read_json(&sidecar_path(path))?;
    if side.classes != N_CLASSES {
        return Err(Error::Dataset(format!(
            "{}: {} classes, expected {N_CLASSES}",
            path.display(),
            side.classes
        )));
    }
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    DoaLabelGrid::from_rows(data, side.n_frames)
        .map_err(|e| Error::Dataset(format!("{}: {e}", path.display())))
}
