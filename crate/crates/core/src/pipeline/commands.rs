use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DirLock, PipelineConfig};
use crate::acoustics::{
    generate_poses, render_brir, resolve_source_position, BankPlanItem, BrirBank, BrirBankEntry,
    BrirBankIndex, BrirConfig, DistanceSpec, Room,
};
use crate::codec::{apply_topology, CodecConfig, Topology};
use crate::doa::{
    decode_topk_per_frame, read_scores, srp_phat_with, DoaGrid, EvalAccumulator, EvalReport,
    SegmentCondition, SteeringVectors,
};
use crate::dsp::stft;
use crate::dsp::wav::{read_wav, write_wav, WavEncoding};
use crate::features::{features_of_segment, write_feature_cache};
use crate::scenegen::{
    build_dataset, dataset_config_hash, read_labels, DatasetManifest, Derivation, SegmentRecord,
    MANIFEST_FILE,
};
use crate::spatial::HrirSet;
use crate::util::{derive_seed, hash_json, read_json, sha256_hex, write_json};
use crate::{Error, Result};

const BRIR_DIR: &str = "brirs";

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Config(format!("{what} is not configured")))
}

fn room_seed(master: u64, room_id: &str) -> u64 {
    let h = sha256_hex(room_id.as_bytes());
    derive_seed(
        master,
        u64::from_str_radix(&h[..16], 16).expect("hex digest"),
    )
}

fn distance_tag(d: &DistanceSpec) -> String {
    match d {
        DistanceSpec::Meters(m) => format!("{m}m"),
        DistanceSpec::WallFraction(f) => format!("w{}", (f * 100.0).round()),
    }
}

/// Every (room, pose, azimuth, distance) the bank should hold, in a fixed
/// order. Source positions that would leave the room are dropped.
pub fn plan_bank(config: &PipelineConfig) -> Result<(Vec<BankPlanItem>, usize)> {
    let bank = &config.bank;
    let n_az = (360.0 / bank.azimuth_step_deg).round() as usize;
    let mut plan = Vec::new();
    let mut excluded = 0;
    for spec in config.room_specs(&bank.rooms)? {
        let room = Room::from_spec(&spec, bank.absorption)
            .map_err(|e| Error::Config(format!("room {}: {e}", spec.id)))?;
        let poses = generate_poses(&room, bank.n_poses, room_seed(bank.pose_seed, &room.id));
        for (p, pose) in poses.iter().enumerate() {
            pose.validate(&room)
                .map_err(|e| Error::Config(format!("room {} pose {p}: {e}", room.id)))?;
            for a in 0..n_az {
                let azimuth_deg = a as f64 * bank.azimuth_step_deg;
                for &distance in &bank.distances {
                    match resolve_source_position(&room, pose, azimuth_deg, distance) {
                        Some(source_m) => plan.push(BankPlanItem {
                            room: room.clone(),
                            pose_index: p,
                            pose: *pose,
                            azimuth_deg,
                            distance,
                            source_m,
                        }),
                        None => excluded += 1,
                    }
                }
            }
        }
    }
    Ok((plan, excluded))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BankSummary {
    pub entries: usize,
    pub rendered: usize,
    pub skipped: usize,
    /// Azimuth/distance pairs outside the room.
    pub excluded: usize,
}

/// Renders the configured BRIR bank into `paths.bank_dir`. Files are named by
/// a hash of everything that determines their contents, so reruns only render
/// what is missing. The index is written last.
pub fn build_brirs(config: &PipelineConfig) -> Result<BankSummary> {
    let root = required(&config.paths.bank_dir, "paths.bank_dir")?;
    let hrirs = config.hrirs.load()?;
    let (plan, excluded) = plan_bank(config)?;
    let _lock = DirLock::acquire(root)?;
    let brir_config = BrirConfig {
        max_order: config.bank.max_order,
        ..BrirConfig::default()
    };
    let fingerprint = hrirs.fingerprint();
    let results = plan
        .par_iter()
        .map(|item| {
            let key = hash_json(&(
                &item.room,
                &item.pose,
                item.source_m,
                &fingerprint,
                &brir_config,
            ));
            let wav = format!("{BRIR_DIR}/{}/{}.wav", item.room.id, &key[..24]);
            let path = root.join(&wav);
            let head_rel = item.pose.to_head_frame([
                item.source_m[0] - item.pose.head_center_m[0],
                item.source_m[1] - item.pose.head_center_m[1],
                item.source_m[2] - item.pose.head_center_m[2],
            ]);
            let distance_m =
                (head_rel[0].powi(2) + head_rel[1].powi(2) + head_rel[2].powi(2)).sqrt();
            let rendered = if path.is_file() {
                false
            } else {
                let brir =
                    render_brir(&item.room, item.source_m, &item.pose, &hrirs, &brir_config)?;
                write_wav(&path, &brir.ir, WavEncoding::Float32)?;
                true
            };
            let entry = BrirBankEntry {
                id: format!(
                    "{}-p{}-az{}-{}",
                    item.room.id,
                    item.pose_index,
                    item.azimuth_deg,
                    distance_tag(&item.distance)
                ),
                room: item.room.id.clone(),
                pose: item.pose_index,
                azimuth_deg: item.azimuth_deg,
                distance_m,
                distance: item.distance,
                wav,
            };
            Ok((entry, rendered))
        })
        .collect::<Result<Vec<_>>>()?;
    let rendered = results.iter().filter(|r| r.1).count();
    let index = BrirBankIndex {
        config_hash: hash_json(&(
            &config.room_specs(&config.bank.rooms)?,
            &config.bank,
            &fingerprint,
            &brir_config,
        )),
        hrir_fingerprint: fingerprint,
        entries: results.into_iter().map(|r| r.0).collect(),
    };
    let bank = BrirBank::from_index(root, index);
    bank.write_index()?;
    let summary = BankSummary {
        entries: bank.entries().len(),
        rendered,
        skipped: bank.entries().len() - rendered,
        excluded,
    };
    info!(
        "bank {}: {} entries ({} rendered, {} already present, {} outside the room)",
        root.display(),
        summary.entries,
        summary.rendered,
        summary.skipped,
        summary.excluded
    );
    Ok(summary)
}

fn guard_existing(dir: &Path, config_hash: &str) -> Result<()> {
    let path = dir.join(MANIFEST_FILE);
    if path.is_file() {
        let existing = DatasetManifest::load(dir)?;
        if existing.config_hash != config_hash {
            return Err(Error::Config(format!(
                "{} already holds a different dataset; use a new directory",
                dir.display()
            )));
        }
    }
    Ok(())
}

fn bank_and_hrirs(config: &PipelineConfig) -> Result<(BrirBank, HrirSet)> {
    let bank = BrirBank::open(required(&config.paths.bank_dir, "paths.bank_dir")?)?;
    let hrirs = config.hrirs.load()?;
    if bank.index().hrir_fingerprint != hrirs.fingerprint() {
        return Err(Error::Config(
            "the BRIR bank was built with a different HRIR set".into(),
        ));
    }
    Ok((bank, hrirs))
}

/// Renders the configured dataset into `paths.dataset_dir`.
pub fn gen_dataset(config: &PipelineConfig) -> Result<DatasetManifest> {
    let out = required(&config.paths.dataset_dir, "paths.dataset_dir")?;
    config.room_specs(&config.dataset.rooms)?;
    let (bank, hrirs) = bank_and_hrirs(config)?;
    let corpus = config.corpus.load()?;
    let _lock = DirLock::acquire(out)?;
    guard_existing(
        out,
        &dataset_config_hash(&config.dataset, &bank, &hrirs, &corpus),
    )?;
    let manifest = build_dataset(&config.dataset, &bank, &hrirs, &corpus, out)?;
    info!(
        "dataset {}: {} segments",
        out.display(),
        manifest.segments.len()
    );
    Ok(manifest)
}

/// Copies a dataset into `output` with the mixtures passed through the codec
/// topology. Labels are copied byte for byte.
pub fn encode_dataset(
    input: &Path,
    output: &Path,
    topology: Topology,
    codec: &CodecConfig,
) -> Result<DatasetManifest> {
    codec.validate()?;
    let source = DatasetManifest::load(input)?;
    source.validate(input)?;
    if fs::canonicalize(input).ok() == fs::canonicalize(output).ok() {
        return Err(Error::Config(
            "encoded dataset needs its own directory".into(),
        ));
    }
    let config_hash = hash_json(&(&source.config_hash, topology, codec));
    let _lock = DirLock::acquire(output)?;
    guard_existing(output, &config_hash)?;
    source.segments.par_iter().try_for_each(|s| -> Result<()> {
        let src = input.join(&s.mixture);
        let dst = output.join(&s.mixture);
        if topology == Topology::None {
            copy(&src, &dst)?;
        } else {
            let audio = read_wav(&src)?;
            let coded = apply_topology(&audio, topology, codec)
                .map_err(|e| Error::Codec(format!("segment {}: {e}", s.id)))?;
            write_wav(&dst, &coded, WavEncoding::Float32)?;
        }
        copy(&input.join(&s.labels), &output.join(&s.labels))?;
        copy(
            &sidecar(&input.join(&s.labels)),
            &sidecar(&output.join(&s.labels)),
        )?;
        Ok(())
    })?;
    let manifest = DatasetManifest {
        config_hash,
        derivation: Some(Derivation {
            parent_config_hash: source.config_hash.clone(),
            topology: topology.to_string(),
            codec: codec.tag(),
            bitrate_bps: (topology != Topology::None
                && codec.kind != crate::codec::CodecKind::Identity)
                .then_some(codec.bitrate_bps),
        }),
        ..source
    };
    manifest.save(output)?;
    info!(
        "encoded {} -> {} ({topology}, {})",
        input.display(),
        output.display(),
        codec.tag()
    );
    Ok(manifest)
}

fn sidecar(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

fn copy(src: &Path, dst: &Path) -> Result<()> {
    if let Some(parent) = dst.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::copy(src, dst)
        .map(|_| ())
        .map_err(|e| Error::io(src, e))
}

/// Source of per-frame sector scores for evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Estimator {
    SrpPhat,
    /// `<dir>/<segment id>.scores` files with JSON sidecars.
    Scores(PathBuf),
}

fn condition(s: &SegmentRecord) -> SegmentCondition {
    let distance_m = match s.distance_condition {
        Some(DistanceSpec::Meters(m)) => Some(m),
        Some(DistanceSpec::WallFraction(_)) => None,
        None => match s.distances_m.split_first() {
            Some((first, rest)) if rest.iter().all(|d| (d - first).abs() < 1e-9) => Some(*first),
            _ => None,
        },
    };
    SegmentCondition {
        snr_db: s.snr_db,
        distance_m,
    }
}

/// Frame accuracy of `estimator` on a dataset, stratified by SNR, distance
/// and per-frame source count. Each frame is decoded with its known number of
/// sources.
pub fn eval_dataset(
    dataset: &Path,
    estimator: &Estimator,
    config: &PipelineConfig,
) -> Result<EvalReport> {
    let manifest = DatasetManifest::load(dataset)?;
    let grid = DoaGrid::default();
    let tag = config
        .eval
        .model_tag
        .clone()
        .unwrap_or_else(|| match estimator {
            Estimator::SrpPhat => "srp-phat".into(),
            Estimator::Scores(dir) => dir
                .file_name()
                .map_or_else(|| "scores".into(), |n| n.to_string_lossy().into_owned()),
        });
    let steering = match estimator {
        Estimator::SrpPhat if !manifest.segments.is_empty() => Some(SteeringVectors::new(
            &config.hrirs.load()?,
            &grid,
            manifest.stft.fft_size,
            manifest.sample_rate_hz,
        )?),
        _ => None,
    };
    let tolerances = &config.eval.tolerances;
    let acc = manifest
        .segments
        .par_iter()
        .map(|s| -> Result<EvalAccumulator> {
            let labels = read_labels(&dataset.join(&s.labels))?;
            let scores = match estimator {
                Estimator::SrpPhat => {
                    let audio = read_wav(&dataset.join(&s.mixture))?;
                    let spec = stft(&audio, &manifest.stft)?;
                    srp_phat_with(&spec, steering.as_ref().expect("built above"), &grid)?
                }
                Estimator::Scores(dir) => read_scores(&dir.join(format!("{}.scores", s.id)))
                    .map_err(|e| Error::Dataset(format!("segment {}: {e}", s.id)))?,
            };
            if scores.n_frames() != labels.n_frames() {
                return Err(Error::Dataset(format!(
                    "segment {}: {} score frames but {} label frames",
                    s.id,
                    scores.n_frames(),
                    labels.n_frames()
                )));
            }
            let counts: Vec<usize> = (0..labels.n_frames())
                .map(|m| labels.active(m).len())
                .collect();
            let estimates = decode_topk_per_frame(&scores, &counts)?;
            let mut acc = EvalAccumulator::new(tag.clone(), tolerances);
            acc.add_segment(condition(s), &estimates, &labels)?;
            Ok(acc)
        })
        .try_reduce(
            || EvalAccumulator::new(tag.clone(), tolerances),
            |a, b| Ok(a.merge(b)),
        )?;
    let mut report = acc.finish();
    report.dataset_config_hash = Some(manifest.config_hash);
    Ok(report)
}

pub const FEATURE_INDEX_FILE: &str = "features.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureIndexEntry {
    pub id: String,
    /// Relative to the feature directory.
    pub features: String,
    pub n_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureIndex {
    pub dataset_config_hash: String,
    /// Always `[3, channels, bins]` per frame.
    pub frame_shape: [usize; 3],
    pub entries: Vec<FeatureIndexEntry>,
}

/// Writes the network input of every segment to `out` as a feature cache.
pub fn write_features(dataset: &Path, out: &Path) -> Result<FeatureIndex> {
    let manifest = DatasetManifest::load(dataset)?;
    let _lock = DirLock::acquire(out)?;
    let entries = manifest
        .segments
        .par_iter()
        .map(|s| {
            let audio = read_wav(&dataset.join(&s.mixture))?;
            let f = features_of_segment(&audio, &manifest.stft)?;
            let rel = format!("{}.features", s.id);
            write_feature_cache(&out.join(&rel), &f)?;
            Ok(FeatureIndexEntry {
                id: s.id.clone(),
                features: rel,
                n_frames: f.n_frames(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let index = FeatureIndex {
        dataset_config_hash: manifest.config_hash,
        frame_shape: [3, manifest.n_channels, manifest.stft.n_bins()],
        entries,
    };
    write_json(&out.join(FEATURE_INDEX_FILE), &index)?;
    Ok(index)
}

/// Concatenates JSON evaluation reports into one table.
pub fn report(inputs: &[PathBuf]) -> Result<EvalReport> {
    let reports = inputs
        .iter()
        .map(|p| read_json::<EvalReport>(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::combine(reports))
}
