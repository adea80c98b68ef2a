use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{frame_correct, DoaGrid};
use crate::scenegen::DoaLabelGrid;
use crate::util::{read_json, write_bytes, write_json};
use crate::{Error, Result};

/// Test condition of one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentCondition {
    /// `None` for the noise-free condition.
    pub snr_db: Option<f64>,
    pub distance_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub snr_db: Option<f64>,
    pub distance_m: Option<f64>,
    /// Labelled sources in the evaluated frames.
    pub n_sources: usize,
    pub model_tag: String,
    pub tolerance_sectors: usize,
    pub accuracy_pct: f64,
    pub n_frames: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Hash of the evaluated dataset, when known.
    #[serde(default)]
    pub dataset_config_hash: Option<String>,
    pub rows: Vec<EvalRow>,
}

#[derive(Debug, Clone, PartialEq)]
struct Cell {
    condition: SegmentCondition,
    n_sources: usize,
    tolerance: usize,
    correct: usize,
    evaluated: usize,
}

/// Frame counts per (condition, source count, tolerance). Merging is
/// associative and order-independent once [`EvalAccumulator::finish`] sorts
/// the rows.
#[derive(Debug, Clone)]
pub struct EvalAccumulator {
    grid: DoaGrid,
    model_tag: String,
    tolerances: Vec<usize>,
    cells: Vec<Cell>,
}

impl EvalAccumulator {
    pub fn new(model_tag: impl Into<String>, tolerances: &[usize]) -> Self {
        Self {
            grid: DoaGrid::default(),
            model_tag: model_tag.into(),
            tolerances: tolerances.to_vec(),
            cells: Vec::new(),
        }
    }

    fn cell(
        &mut self,
        condition: SegmentCondition,
        n_sources: usize,
        tolerance: usize,
    ) -> &mut Cell {
        let pos = self.cells.iter().position(|c| {
            c.condition == condition && c.n_sources == n_sources && c.tolerance == tolerance
        });
        let i = pos.unwrap_or_else(|| {
            self.cells.push(Cell {
                condition,
                n_sources,
                tolerance,
                correct: 0,
                evaluated: 0,
            });
            self.cells.len() - 1
        });
        &mut self.cells[i]
    }

    /// Adds one segment; frames are grouped by their labelled source count.
    pub fn add_segment(
        &mut self,
        condition: SegmentCondition,
        estimates: &[Vec<usize>],
        labels: &DoaLabelGrid,
    ) -> Result<()> {
        if estimates.len() != labels.n_frames() {
            return Err(Error::ShapeMismatch(format!(
                "{} estimate frames, {} label frames",
                estimates.len(),
                labels.n_frames()
            )));
        }
        let grid = self.grid;
        for (m, est) in estimates.iter().enumerate() {
            let active = labels.active(m);
            if active.is_empty() {
                continue;
            }
            for t in self.tolerances.clone() {
                let ok = frame_correct(&grid, &active, est, t);
                let cell = self.cell(condition, active.len(), t);
                cell.evaluated += 1;
                cell.correct += usize::from(ok);
            }
        }
        Ok(())
    }

    pub fn merge(mut self, other: EvalAccumulator) -> Self {
        for c in other.cells {
            let cell = self.cell(c.condition, c.n_sources, c.tolerance);
            cell.correct += c.correct;
            cell.evaluated += c.evaluated;
        }
        self
    }

    pub fn finish(self) -> EvalReport {
        let tag = self.model_tag;
        let mut rows: Vec<EvalRow> = self
            .cells
            .into_iter()
            .map(|c| EvalRow {
                snr_db: c.condition.snr_db,
                distance_m: c.condition.distance_m,
                n_sources: c.n_sources,
                model_tag: tag.clone(),
                tolerance_sectors: c.tolerance,
                accuracy_pct: 100.0 * c.correct as f64 / c.evaluated as f64,
                n_frames: c.evaluated,
            })
            .collect();
        sort_rows(&mut rows);
        EvalReport {
            dataset_config_hash: None,
            rows,
        }
    }
}

fn sort_rows(rows: &mut [EvalRow]) {
    let key = |v: Option<f64>| v.unwrap_or(f64::INFINITY);
    rows.sort_by(|a, b| {
        a.model_tag
            .cmp(&b.model_tag)
            .then(key(a.snr_db).total_cmp(&key(b.snr_db)))
            .then(key(a.distance_m).total_cmp(&key(b.distance_m)))
            .then(a.n_sources.cmp(&b.n_sources))
            .then(a.tolerance_sectors.cmp(&b.tolerance_sectors))
    });
}

#[derive(Serialize)]
struct CsvRow<'a> {
    snr_db: String,
    distance_m: String,
    n_sources: usize,
    model_tag: &'a str,
    tolerance_sectors: usize,
    accuracy_pct: String,
    n_frames: usize,
}

impl EvalReport {
    /// Concatenates reports (e.g. several models) into one sorted table.
    pub fn combine(reports: impl IntoIterator<Item = EvalReport>) -> Self {
        let mut rows: Vec<EvalRow> = reports.into_iter().flat_map(|r| r.rows).collect();
        sort_rows(&mut rows);
        Self {
            dataset_config_hash: None,
            rows,
        }
    }

    /// The noise-free condition is written as `inf`, an unknown distance as an
    /// empty field.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(CsvRow {
                snr_db: r
                    .snr_db
                    .map_or_else(|| "inf".to_string(), |v| v.to_string()),
                distance_m: r.distance_m.map(|v| v.to_string()).unwrap_or_default(),
                n_sources: r.n_sources,
                model_tag: &r.model_tag,
                tolerance_sectors: r.tolerance_sectors,
                accuracy_pct: format!("{:.4}", r.accuracy_pct),
                n_frames: r.n_frames,
            })
            .map_err(|e| Error::invalid(format!("CSV: {e}")))?;
        }
        if self.rows.is_empty() {
            w.write_record([
                "snr_db",
                "distance_m",
                "n_sources",
                "model_tag",
                "tolerance_sectors",
                "accuracy_pct",
                "n_frames",
            ])
            .map_err(|e| Error::invalid(format!("CSV: {e}")))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::invalid(format!("CSV: {e}")))?;
        Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_bytes(path, self.to_csv()?.as_bytes())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        read_json(path)
    }
}
