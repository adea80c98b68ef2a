use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acoustics::{AbsorptionModel, DistanceSpec, RoomSpec};
use crate::codec::{CodecConfig, Topology};
use crate::scenegen::{GenerationConfig, SpeechCorpus};
use crate::spatial::{horizontal_grid, synth_spherical_head, BteArrayGeometry, HrirSet};
use crate::{Error, Result, PIPELINE_SAMPLE_RATE};

/// The fifteen shoebox rooms: R1-R10 for training, R11-R13 for validation,
/// R14-R15 for testing.
pub fn standard_rooms() -> Vec<RoomSpec> {
    [
        ("R1", [6.0, 6.0, 2.5], 0.3),
        ("R2", [5.0, 4.0, 2.8], 0.2),
        ("R3", [10.0, 6.0, 2.4], 0.8),
        ("R4", [8.0, 3.0, 3.1], 0.4),
        ("R5", [8.0, 5.0, 2.9], 0.6),
        ("R6", [4.0, 9.0, 3.3], 0.5),
        ("R7", [7.0, 7.0, 2.3], 0.7),
        ("R8", [5.0, 6.0, 3.6], 0.45),
        ("R9", [9.0, 6.0, 3.2], 0.55),
        ("R10", [11.0, 7.0, 3.0], 0.75),
        ("R11", [5.5, 7.5, 2.7], 0.525),
        ("R12", [8.5, 4.5, 3.5], 0.625),
        ("R13", [6.5, 6.5, 2.3], 0.475),
        ("R14", [5.0, 4.0, 2.5], 0.2),
        ("R15", [7.0, 6.0, 3.5], 0.6),
    ]
    .into_iter()
    .map(|(id, dims, t60)| RoomSpec::new(id, dims, t60))
    .collect()
}

/// Where the HRIR set comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HrirSource {
    /// A manifest written by [`HrirSet::save`] or by hand.
    Manifest { path: PathBuf },
    /// Rigid-sphere model of the default BTE array on a horizontal grid.
    SphericalHead { step_deg: f64, ir_length: usize },
}

impl Default for HrirSource {
    fn default() -> Self {
        HrirSource::SphericalHead {
            step_deg: 5.0,
            ir_length: 256,
        }
    }
}

impl HrirSource {
    pub fn load(&self) -> Result<HrirSet> {
        match self {
            HrirSource::Manifest { path } => HrirSet::load(path),
            HrirSource::SphericalHead {
                step_deg,
                ir_length,
            } => {
                if !(*step_deg > 0.0) {
                    return Err(Error::Config("HRIR grid step must be positive".into()));
                }
                synth_spherical_head(
                    &horizontal_grid(*step_deg),
                    &BteArrayGeometry::default(),
                    *ir_length,
                    PIPELINE_SAMPLE_RATE,
                )
            }
        }
    }
}

/// Dry source material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CorpusSource {
    /// Every WAV file below `path`, at 16 kHz.
    Dir { path: PathBuf },
    /// Generated speech-like signals.
    Synthetic {
        n_utterances: usize,
        duration_s: f64,
        seed: u64,
    },
}

impl Default for CorpusSource {
    fn default() -> Self {
        CorpusSource::Synthetic {
            n_utterances: 64,
            duration_s: 4.0,
            seed: 0,
        }
    }
}

impl CorpusSource {
    pub fn load(&self) -> Result<SpeechCorpus> {
        match self {
            CorpusSource::Dir { path } => SpeechCorpus::load_dir(path, PIPELINE_SAMPLE_RATE),
            CorpusSource::Synthetic {
                n_utterances,
                duration_s,
                seed,
            } => SpeechCorpus::synthetic(*n_utterances, *duration_s, PIPELINE_SAMPLE_RATE, *seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub bank_dir: Option<PathBuf>,
    pub dataset_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BankConfig {
    pub rooms: Vec<String>,
    pub n_poses: usize,
    pub azimuth_step_deg: f64,
    pub distances: Vec<DistanceSpec>,
    pub pose_seed: u64,
    pub absorption: AbsorptionModel,
    /// Reflection order; unset derives it from the room and T60.
    pub max_order: Option<usize>,
}

impl Default for BankConfig {
    fn default() -> Self {
        Self {
            rooms: vec!["R14".into(), "R15".into()],
            n_poses: 4,
            azimuth_step_deg: 5.0,
            distances: vec![
                DistanceSpec::Meters(1.0),
                DistanceSpec::Meters(2.0),
                DistanceSpec::Meters(3.0),
            ],
            pose_seed: 0,
            absorption: AbsorptionModel::Sabine,
            max_order: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub tolerances: Vec<usize>,
    pub model_tag: Option<String>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            tolerances: vec![0, 1],
            model_tag: None,
        }
    }
}

/// Everything the batch commands need. Loaded from TOML or JSON, with
/// `key.path=value` overrides applied on top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub hrirs: HrirSource,
    pub corpus: CorpusSource,
    pub paths: Paths,
    pub rooms: Vec<RoomSpec>,
    pub bank: BankConfig,
    pub dataset: GenerationConfig,
    pub codec: CodecConfig,
    pub topology: Topology,
    pub eval: EvalConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            hrirs: HrirSource::default(),
            corpus: CorpusSource::default(),
            paths: Paths::default(),
            rooms: standard_rooms(),
            bank: BankConfig::default(),
            dataset: GenerationConfig::default(),
            codec: CodecConfig::default(),
            topology: Topology::None,
            eval: EvalConfig::default(),
        }
    }
}

impl PipelineConfig {
    /// Reads `path` (TOML unless the extension is `.json`) and applies
    /// `overrides` of the form `a.b.c=value`, where `value` is parsed as a
    /// TOML value and falls back to a plain string.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut value = match path {
            None => serde_json::to_value(Self::default()).expect("serializable default"),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                let is_json = p
                    .extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("json"));
                let parsed: serde_json::Value = if is_json {
                    serde_json::from_str(&text)
                        .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
                } else {
                    toml::from_str(&text)
                        .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
                };
                merge(
                    serde_json::to_value(Self::default()).expect("serializable default"),
                    parsed,
                )
            }
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let config: Self =
            serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.rooms.iter().enumerate() {
            r.validate()
                .map_err(|e| Error::Config(format!("room {i} ({}): {e}", r.id)))?;
            if self.rooms[..i].iter().any(|o| o.id == r.id) {
                return Err(Error::Config(format!("room id {} defined twice", r.id)));
            }
        }
        self.room_specs(&self.bank.rooms)?;
        self.room_specs(&self.dataset.rooms)?;
        if !(self.bank.azimuth_step_deg > 0.0 && self.bank.azimuth_step_deg <= 360.0) {
            return Err(Error::Config("azimuth step must be in (0, 360]".into()));
        }
        if self.bank.n_poses == 0 {
            return Err(Error::Config("at least one pose per room is needed".into()));
        }
        for d in &self.bank.distances {
            let ok = match d {
                DistanceSpec::Meters(m) => *m > 0.0,
                DistanceSpec::WallFraction(f) => *f > 0.0 && *f < 1.0,
            };
            if !ok {
                return Err(Error::Config(format!("invalid distance {}", d.label())));
            }
        }
        self.dataset.validate()?;
        self.codec.validate()?;
        Ok(())
    }

    /// Specs for `ids`, in order; unknown ids are an error.
    pub fn room_specs(&self, ids: &[String]) -> Result<Vec<RoomSpec>> {
        let unknown: Vec<&str> = ids
            .iter()
            .filter(|id| !self.rooms.iter().any(|r| &r.id == *id))
            .map(String::as_str)
            .collect();
        if !unknown.is_empty() {
            return Err(Error::Config(format!(
                "unknown room id(s): {}",
                unknown.join(", ")
            )));
        }
        Ok(ids
            .iter()
            .map(|id| {
                self.rooms
                    .iter()
                    .find(|r| &r.id == id)
                    .expect("checked")
                    .clone()
            })
            .collect())
    }
}

/// Overlays `top` on `base`: objects merge recursively, everything else
/// replaces.
fn merge(base: serde_json::Value, top: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match (base, top) {
        // a tagged enum switching variant is replaced, not merged
        (Value::Object(b), Value::Object(t))
            if b.get("kind").is_some()
                && t.get("kind").is_some()
                && b.get("kind") != t.get("kind") =>
        {
            Value::Object(t)
        }
        (Value::Object(mut b), Value::Object(t)) => {
            for (k, v) in t {
                let merged = match b.remove(&k) {
                    Some(old) => merge(old, v),
                    None => v,
                };
                b.insert(k, merged);
            }
            Value::Object(b)
        }
        (_, t) => t,
    }
}

fn apply_override(root: &mut serde_json::Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {spec:?} is not key=value")))?;
    let value: serde_json::Value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .map(|v| serde_json::to_value(v).expect("TOML values map to JSON"))
        .unwrap_or_else(|| serde_json::Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| {
            Error::Config(format!("cannot set {key}: {part} is not inside a table"))
        })?;
        if i + 1 == parts.len() {
            obj.insert((*part).to_string(), value);
            return Ok(());
        }
        node = obj
            .entry((*part).to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    Err(Error::Config(format!("empty override key in {spec:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_rooms_are_attainable() {
        let c = PipelineConfig::default();
        c.validate().unwrap();
        assert_eq!(c.rooms.len(), 15);
        for r in &c.rooms {
            crate::acoustics::Room::from_spec(r, AbsorptionModel::Sabine).unwrap();
        }
    }

    #[test]
    fn overrides() {
        let c = PipelineConfig::load(
            None,
            &[
                "dataset.n_segments=7".into(),
                "bank.rooms=[\"R1\"]".into(),
                "topology=encode-6".into(),
                "codec.kind=reference-lossy".into(),
                "paths.bank_dir=/tmp/x".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.dataset.n_segments, 7);
        assert_eq!(c.bank.rooms, vec!["R1"]);
        assert_eq!(c.topology, Topology::Encode6);
        assert_eq!(c.paths.bank_dir.as_deref(), Some(Path::new("/tmp/x")));
        assert!(PipelineConfig::load(None, &["nokey".into()]).is_err());
        assert!(PipelineConfig::load(None, &["bank.rooms=[\"R99\"]".into()]).is_err());
        assert!(PipelineConfig::load(None, &["bank.bogus=1".into()]).is_err());
    }

    #[test]
    fn toml_file_merges_over_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(
            &p,
            "[bank]\nn_poses = 2\ndistances = [{ wall_fraction = 0.2 }]\n[dataset.snr]\nkind = \"levels\"\nlevels = [5, inf]\n",
        )
        .unwrap();
        let c = PipelineConfig::load(Some(&p), &[]).unwrap();
        assert_eq!(c.bank.n_poses, 2);
        assert_eq!(c.bank.azimuth_step_deg, 5.0);
        assert_eq!(c.bank.distances, vec![DistanceSpec::WallFraction(0.2)]);
        assert_eq!(c.rooms.len(), 15);
        assert!(
            matches!(&c.dataset.snr, crate::scenegen::SnrSpec::Levels { levels } if levels[1].as_option().is_none())
        );
    }

    #[test]
    fn switching_variant_replaces_the_table() {
        let c = PipelineConfig::load(
            None,
            &["hrirs={kind=\"manifest\", path=\"h/manifest.json\"}".into()],
        )
        .unwrap();
        assert_eq!(
            c.hrirs,
            HrirSource::Manifest {
                path: "h/manifest.json".into()
            }
        );
    }
}
