//! Direction-of-arrival grid, SRP-PHAT, decoding and accuracy reports.

mod report;
mod srp;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scenegen::{DoaLabelGrid, N_CLASSES};
use crate::util::{read_json, write_bytes, write_json};
use crate::{Error, Result};

pub use report::{EvalAccumulator, EvalReport, EvalRow, SegmentCondition};
pub use srp::{srp_phat, srp_phat_with, SteeringVectors, SRP_BAND_HZ};

/// Horizontal-plane sectors; sector `i` is centred on `i * resolution`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoaGrid {
    n_sectors: usize,
}

impl Default for DoaGrid {
    fn default() -> Self {
        Self {
            n_sectors: N_CLASSES,
        }
    }
}

impl DoaGrid {
    pub fn n_sectors(&self) -> usize {
        self.n_sectors
    }

    pub fn resolution_deg(&self) -> f64 {
        360.0 / self.n_sectors as f64
    }

    pub fn sector_azimuth_deg(&self, i: usize) -> f64 {
        i as f64 * self.resolution_deg()
    }

    /// Circular distance between two sectors.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b) % self.n_sectors;
        d.min(self.n_sectors - d)
    }
}

/// Per-frame sector scores `[frame][sector]`: probabilities or SRP power.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorScores {
    n_frames: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreSidecar {
    pub n_frames: usize,
    pub classes: usize,
}

impl SectorScores {
    pub fn from_rows(data: Vec<f64>, n_frames: usize) -> Result<Self> {
        if data.len() != n_frames * N_CLASSES {
            return Err(Error::ShapeMismatch(format!(
                "{} scores for {n_frames} x {N_CLASSES}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("scores must be finite"));
        }
        Ok(Self { n_frames, data })
    }

    /// Scores equal to the labels: 1 for active classes, 0 elsewhere.
    pub fn from_labels(labels: &DoaLabelGrid) -> Self {
        Self {
            n_frames: labels.n_frames(),
            data: labels.as_bytes().iter().map(|&b| f64::from(b)).collect(),
        }
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.data[frame * N_CLASSES..(frame + 1) * N_CLASSES]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Score files: little-endian `f32` rows `[n_frames x 72]` plus a JSON
/// sidecar `{n_frames, classes}`, the same layout as label files.
pub fn write_scores(path: &Path, scores: &SectorScores) -> Result<()> {
    let bytes: Vec<u8> = scores
        .data
        .iter()
        .flat_map(|&v| (v as f32).to_le_bytes())
        .collect();
    write_bytes(path, &bytes)?;
    write_json(
        &sidecar_path(path),
        &ScoreSidecar {
            n_frames: scores.n_frames,
            classes: N_CLASSES,
        },
    )
}

pub fn read_scores(path: &Path) -> Result<SectorScores> {
    let side: ScoreSidecar = read_json(&sidecar_path(path))?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if side.classes != N_CLASSES || bytes.len() != side.n_frames * N_CLASSES * 4 {
        return Err(Error::Dataset(format!(
            "{}: expected {} x {N_CLASSES} float32 scores",
            path.display(),
            side.n_frames
        )));
    }
    let data = bytes
        .chunks_exact(4)
        .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])))
        .collect();
    SectorScores::from_rows(data, side.n_frames)
}

/// The `j` best sectors of every frame, best first; ties go to the lower
/// index.
pub fn decode_topk(scores: &SectorScores, j: usize) -> Result<Vec<Vec<usize>>> {
    decode_topk_per_frame(scores, &vec![j; scores.n_frames])
}

/// Like [`decode_topk`] with a separate count for every frame.
pub fn decode_topk_per_frame(scores: &SectorScores, counts: &[usize]) -> Result<Vec<Vec<usize>>> {
    if counts.len() != scores.n_frames {
        return Err(Error::ShapeMismatch(format!(
            "{} counts for {} frames",
            counts.len(),
            scores.n_frames
        )));
    }
    if let Some(&j) = counts.iter().find(|&&j| j > N_CLASSES) {
        return Err(Error::invalid(format!(
            "cannot pick {j} of {N_CLASSES} sectors"
        )));
    }
    Ok(counts
        .iter()
        .enumerate()
        .map(|(m, &j)| {
            let row = scores.row(m);
            let mut idx: Vec<usize> = (0..N_CLASSES).collect();
            idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
            idx.truncate(j);
            idx
        })
        .collect())
}

/// Whether every labelled sector can be paired with a distinct estimate within
/// `tolerance` sectors (bipartite matching).
pub fn frame_correct(
    grid: &DoaGrid,
    labels: &[usize],
    estimates: &[usize],
    tolerance: usize,
) -> bool {
    fn augment(
        l: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for &e in &adj[l] {
            if seen[e] {
                continue;
            }
            seen[e] = true;
            if owner[e].is_none_or(|o| augment(o, adj, seen, owner)) {
                owner[e] = Some(l);
                return true;
            }
        }
        false
    }
    let adj: Vec<Vec<usize>> = labels
        .iter()
        .map(|&l| {
            (0..estimates.len())
                .filter(|&e| grid.distance(l, estimates[e]) <= tolerance)
                .collect()
        })
        .collect();
    let mut owner = vec![None; estimates.len()];
    (0..labels.len()).all(|l| augment(l, &adj, &mut vec![false; estimates.len()], &mut owner))
}

/// Correct and evaluated frame counts; frames without labelled sources are
/// skipped.
pub fn accuracy_counts(
    grid: &DoaGrid,
    estimates: &[Vec<usize>],
    labels: &DoaLabelGrid,
    tolerance: usize,
) -> Result<(usize, usize)> {
    if estimates.len() != labels.n_frames() {
        return Err(Error::ShapeMismatch(format!(
            "{} estimate frames, {} label frames",
            estimates.len(),
            labels.n_frames()
        )));
    }
    let (mut correct, mut evaluated) = (0, 0);
    for (m, est) in estimates.iter().enumerate() {
        let active = labels.active(m);
        if active.is_empty() {
            continue;
        }
        evaluated += 1;
        correct += usize::from(frame_correct(grid, &active, est, tolerance));
    }
    Ok((correct, evaluated))
}

/// Frame accuracy in percent, or `None` when no frame has a labelled source.
pub fn accuracy(
    grid: &DoaGrid,
    estimates: &[Vec<usize>],
    labels: &DoaLabelGrid,
    tolerance: usize,
) -> Result<Option<f64>> {
    let (c, n) = accuracy_counts(grid, estimates, labels, tolerance)?;
    Ok((n > 0).then(|| 100.0 * c as f64 / n as f64))
}
