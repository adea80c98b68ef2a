use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::activity::{sample_activity_with, ActivityInterval, ActivityParams, ActivityTimeline};
use super::corpus::SpeechCorpus;
use super::labels::{read_labels, write_labels, N_CLASSES};
use super::render::{render_segment, SegmentConfig};
use crate::acoustics::{BrirBank, BrirBankEntry, DiffuseNoiseGenerator, DistanceSpec};
use crate::dsp::wav::{write_wav, WavEncoding};
use crate::dsp::StftConfig;
use crate::spatial::HrirSet;
use crate::util::{derive_seed, hash_json, read_json, rng, write_json};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DATASET_FORMAT: &str = "binaural-doa-dataset/1";

/// An SNR condition in dB; `+inf` means no noise is added. Serialised as a
/// number, or as the string `"inf"` for the noise-free condition (`null` is
/// accepted too).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrLevel(pub f64);

impl SnrLevel {
    pub fn as_option(self) -> Option<f64> {
        self.0.is_finite().then_some(self.0)
    }
}

impl Serialize for SnrLevel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str("inf")
        }
    }
}

impl<'de> Deserialize<'de> for SnrLevel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(Option<f64>),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(None) => Ok(SnrLevel(f64::INFINITY)),
            Raw::Num(Some(v)) if v == f64::INFINITY || v.is_finite() => Ok(SnrLevel(v)),
            Raw::Text(t) if matches!(t.as_str(), "inf" | "clean" | "none") => {
                Ok(SnrLevel(f64::INFINITY))
            }
            _ => Err(serde::de::Error::custom(
                "SNR must be a finite number or \"inf\"",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SnrSpec {
    /// Drawn uniformly per segment.
    Uniform { min_db: f64, max_db: f64 },
    /// Fixed set of conditions.
    Levels { levels: Vec<SnrLevel> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub name: String,
    pub n_segments: usize,
    pub seed: u64,
    pub activity: ActivityParams,
    pub snr: SnrSpec,
    /// Rooms to draw from; empty means every room in the bank.
    pub rooms: Vec<String>,
    /// Distance conditions; empty means every distance in the bank.
    pub distances: Vec<DistanceSpec>,
    /// Cycle through SNR x distance conditions instead of drawing them.
    pub stratify: bool,
    pub stft: StftConfig,
    pub peak_level: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            name: "train".into(),
            n_segments: 100,
            seed: 0,
            activity: ActivityParams::default(),
            snr: SnrSpec::Uniform {
                min_db: 0.0,
                max_db: 30.0,
            },
            rooms: Vec::new(),
            distances: Vec::new(),
            stratify: false,
            stft: StftConfig::default(),
            peak_level: 0.9,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        self.stft.validate()?;
        match &self.snr {
            SnrSpec::Uniform { min_db, max_db } => {
                if !(min_db.is_finite() && max_db.is_finite() && min_db <= max_db) {
                    return Err(Error::Config(format!("bad SNR range [{min_db}, {max_db}]")));
                }
            }
            SnrSpec::Levels { levels } if levels.is_empty() => {
                return Err(Error::Config("SNR level list is empty".into()));
            }
            SnrSpec::Levels { .. } => {}
        }
        if self.stratify && !matches!(self.snr, SnrSpec::Levels { .. }) {
            return Err(Error::Config(
                "stratified generation needs discrete SNR levels".into(),
            ));
        }
        if !(self.peak_level > 0.0 && self.peak_level <= 1.0) {
            return Err(Error::Config("peak level must be in (0, 1]".into()));
        }
        if !(self.activity.segment_s > 0.0 && self.activity.mean_dwell_s > 0.0) {
            return Err(Error::Config(
                "segment length and mean dwell must be positive".into(),
            ));
        }
        Ok(())
    }

    fn segment_config(&self) -> SegmentConfig {
        SegmentConfig {
            segment_s: self.activity.segment_s,
            stft: self.stft,
            peak_level: self.peak_level,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub id: String,
    /// Paths relative to the dataset directory.
    pub mixture: String,
    pub labels: String,
    pub n_frames: usize,
    /// `None` when no noise was added.
    pub snr_db: Option<f64>,
    pub room: String,
    pub pose: usize,
    /// Most sources active at the same time.
    pub n_sources: usize,
    pub brir_ids: Vec<String>,
    pub azimuths_deg: Vec<f64>,
    pub distances_m: Vec<f64>,
    /// Distance condition the segment was generated for, when stratified.
    pub distance_condition: Option<DistanceSpec>,
}

/// Processing applied to a dataset derived from another one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derivation {
    pub parent_config_hash: String,
    pub topology: String,
    pub codec: String,
    pub bitrate_bps: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format: String,
    pub name: String,
    pub config_hash: String,
    pub seed: u64,
    pub sample_rate_hz: u32,
    pub n_channels: usize,
    pub channel_names: Vec<String>,
    pub n_classes: usize,
    pub stft: StftConfig,
    pub segment_s: f64,
    pub config: serde_json::Value,
    pub derivation: Option<Derivation>,
    pub segments: Vec<SegmentRecord>,
}

impl DatasetManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let m: Self = read_json(&dir.join(MANIFEST_FILE))?;
        if m.format != DATASET_FORMAT {
            return Err(Error::Dataset(format!(
                "unsupported dataset format {:?}",
                m.format
            )));
        }
        Ok(m)
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(MANIFEST_FILE), self)
    }

    /// Checks that every referenced file exists and label shapes agree.
    pub fn validate(&self, dir: &Path) -> Result<()> {
        for s in &self.segments {
            let mix = dir.join(&s.mixture);
            if !mix.is_file() {
                return Err(Error::Dataset(format!(
                    "segment {}: missing {}",
                    s.id,
                    mix.display()
                )));
            }
            let labels = read_labels(&dir.join(&s.labels))?;
            if labels.n_frames() != s.n_frames {
                return Err(Error::Dataset(format!(
                    "segment {}: {} label frames, manifest says {}",
                    s.id,
                    labels.n_frames(),
                    s.n_frames
                )));
            }
        }
        Ok(())
    }
}

/// Candidate pools: bank entries grouped by (room, pose).
type Pools<'a> = BTreeMap<(String, usize), Vec<&'a BrirBankEntry>>;

fn coverage<'a>(
    config: &GenerationConfig,
    bank: &'a BrirBank,
) -> Result<(Pools<'a>, Vec<DistanceSpec>)> {
    let rooms: Vec<String> = if config.rooms.is_empty() {
        let mut r: Vec<String> = bank.entries().iter().map(|e| e.room.clone()).collect();
        r.sort();
        r.dedup();
        r
    } else {
        config.rooms.clone()
    };
    let distances: Vec<DistanceSpec> = if config.distances.is_empty() {
        let mut d: Vec<DistanceSpec> = Vec::new();
        for e in bank.entries() {
            if !d.contains(&e.distance) {
                d.push(e.distance);
            }
        }
        d
    } else {
        config.distances.clone()
    };
    let mut gaps = Vec::new();
    for room in &rooms {
        for d in &distances {
            if !bank
                .entries()
                .iter()
                .any(|e| &e.room == room && &e.distance == d)
            {
                gaps.push(format!("room {room} at distance {}", d.label()));
            }
        }
    }
    if rooms.is_empty() {
        gaps.push("bank has no entries".into());
    }
    if !gaps.is_empty() {
        return Err(Error::Coverage(format!(
            "no BRIRs for: {}",
            gaps.join(", ")
        )));
    }
    let mut pools: Pools = BTreeMap::new();
    for e in bank.entries() {
        if rooms.contains(&e.room) && distances.contains(&e.distance) {
            pools.entry((e.room.clone(), e.pose)).or_default().push(e);
        }
    }
    Ok((pools, distances))
}

struct Plan<'a> {
    snr: SnrLevel,
    distance: Option<DistanceSpec>,
    room: String,
    pose: usize,
    candidates: Vec<&'a BrirBankEntry>,
    timeline: ActivityTimeline,
    render_seed: u64,
}

fn plan_segment<'a>(
    i: usize,
    config: &GenerationConfig,
    pools: &Pools<'a>,
    distances: &[DistanceSpec],
) -> Result<Plan<'a>> {
    let seed = derive_seed(config.seed, i as u64);
    let mut r = rng(seed);
    let (snr, distance) = match &config.snr {
        SnrSpec::Levels { levels } if config.stratify => {
            let d = distances[(i / levels.len()) % distances.len()];
            (levels[i % levels.len()], Some(d))
        }
        SnrSpec::Levels { levels } => (levels[r.random_range(0..levels.len())], None),
        SnrSpec::Uniform { min_db, max_db } => (SnrLevel(r.random_range(*min_db..=*max_db)), None),
    };
    let keys: Vec<&(String, usize)> = pools
        .iter()
        .filter(|(_, v)| distance.is_none_or(|d| v.iter().any(|e| e.distance == d)))
        .map(|(k, _)| k)
        .collect();
    if keys.is_empty() {
        return Err(Error::Coverage(format!(
            "no room/pose offers distance {}",
            distance.map_or("any".into(), |d| d.label())
        )));
    }
    let key = keys[r.random_range(0..keys.len())];
    let candidates: Vec<&BrirBankEntry> = pools[key]
        .iter()
        .copied()
        .filter(|e| distance.is_none_or(|d| e.distance == d))
        .collect();
    let timeline = sample_activity_with(&config.activity, candidates.len(), &mut r)?;
    Ok(Plan {
        snr,
        distance,
        room: key.0.clone(),
        pose: key.1,
        candidates,
        timeline,
        render_seed: derive_seed(seed, 0x5e6),
    })
}

/// Hash identifying everything that determines a dataset's contents.
pub fn dataset_config_hash(
    config: &GenerationConfig,
    bank: &BrirBank,
    hrirs: &HrirSet,
    corpus: &SpeechCorpus,
) -> String {
    hash_json(&(
        config,
        &bank.index().config_hash,
        hrirs.fingerprint(),
        corpus.id(),
    ))
}

/// Renders a whole dataset into `out_dir` and writes its manifest.
///
/// Each segment takes one room and listener pose; every activation draws a
/// BRIR from that pose. Segments are rendered in parallel, with per-segment
/// seeds derived from the master seed, so the output does not depend on the
/// thread count.
pub fn build_dataset(
    config: &GenerationConfig,
    bank: &BrirBank,
    hrirs: &HrirSet,
    corpus: &SpeechCorpus,
    out_dir: &Path,
) -> Result<DatasetManifest> {
    config.validate()?;
    let fs = hrirs.sample_rate_hz();
    if corpus.sample_rate_hz() != fs {
        return Err(Error::invalid(format!(
            "corpus at {} Hz, HRIRs at {fs} Hz",
            corpus.sample_rate_hz()
        )));
    }
    let (pools, distances) = coverage(config, bank)?;
    let seg_cfg = config.segment_config();
    let n = (seg_cfg.segment_s * f64::from(fs)).round() as usize;
    let noise = DiffuseNoiseGenerator::new(hrirs, n)?;
    let config_json = serde_json::to_value(config).expect("serializable config");
    let config_hash = dataset_config_hash(config, bank, hrirs, corpus);

    let segments = (0..config.n_segments)
        .into_par_iter()
        .map(|i| {
            let plan = plan_segment(i, config, &pools, &distances)?;
            // load only the BRIRs the timeline uses, remapping indices
            let mut used: Vec<usize> = plan.timeline.intervals().map(|iv| iv.brir).collect();
            used.sort_unstable();
            used.dedup();
            let brirs = used
                .iter()
                .map(|&u| bank.load(plan.candidates[u]).map(Arc::new))
                .collect::<Result<Vec<_>>>()?;
            let remapped = ActivityTimeline {
                segment_s: plan.timeline.segment_s,
                slots: plan
                    .timeline
                    .slots
                    .iter()
                    .map(|s| {
                        s.iter()
                            .map(|iv| ActivityInterval {
                                brir: used.binary_search(&iv.brir).expect("collected above"),
                                ..*iv
                            })
                            .collect()
                    })
                    .collect(),
            };
            let (audio, labels) = render_segment(
                &remapped,
                &brirs,
                corpus,
                plan.snr.as_option(),
                &noise,
                &seg_cfg,
                plan.render_seed,
            )?;
            let id = format!("seg_{i:05}");
            let mixture = format!("audio/{id}.wav");
            let label_path = format!("labels/{id}.labels");
            write_wav(&out_dir.join(&mixture), &audio, WavEncoding::Float32)?;
            write_labels(&out_dir.join(&label_path), &labels)?;
            log::info!("segment {}/{}: {id}", i + 1, config.n_segments);
            let entries: Vec<&BrirBankEntry> = used.iter().map(|&u| plan.candidates[u]).collect();
            Ok(SegmentRecord {
                id,
                mixture,
                labels: label_path,
                n_frames: labels.n_frames(),
                snr_db: plan.snr.as_option(),
                room: plan.room,
                pose: plan.pose,
                n_sources: plan.timeline.max_concurrent(),
                brir_ids: entries.iter().map(|e| e.id.clone()).collect(),
                azimuths_deg: entries.iter().map(|e| e.azimuth_deg).collect(),
                distances_m: entries.iter().map(|e| e.distance_m).collect(),
                distance_condition: plan.distance,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = DatasetManifest {
        format: DATASET_FORMAT.into(),
        name: config.name.clone(),
        config_hash,
        seed: config.seed,
        sample_rate_hz: fs,
        n_channels: hrirs.n_channels(),
        channel_names: hrirs.channel_names().to_vec(),
        n_classes: N_CLASSES,
        stft: config.stft,
        segment_s: seg_cfg.segment_s,
        config: config_json,
        derivation: None,
        segments,
    };
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    manifest.save(out_dir)?;
    Ok(manifest)
}
