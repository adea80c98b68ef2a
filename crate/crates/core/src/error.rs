use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("zero-energy {0} signal")]
    ZeroEnergy(&'static str),
    #[error("duplicate direction (azimuth {azimuth_deg} deg, elevation {elevation_deg} deg)")]
    DuplicateDirection {
        azimuth_deg: f64,
        elevation_deg: f64,
    },
    #[error("rate mismatch in {path}: expected {expected} Hz, found {found} Hz")]
    RateMismatch {
        path: PathBuf,
        expected: u32,
        found: u32,
    },
    #[error("channel count mismatch in {path}: expected {expected}, found {found}")]
    ChannelMismatch {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("unattainable T60 of {t60_s} s: absorption would be {absorption:.3}")]
    UnattainableT60 { t60_s: f64, absorption: f64 },
    #[error("position {0:?} is outside the room")]
    OutsideRoom([f64; 3]),
    #[error(
        "HRIR set has no direction at azimuth {azimuth_deg} deg, elevation {elevation_deg} deg"
    )]
    MissingDirection {
        azimuth_deg: f64,
        elevation_deg: f64,
    },
    #[error("codec: {0}")]
    Codec(String),
    #[error("external codec command `{command}` failed ({}): {stderr}", exit_status(.status))]
    ExternalCodec {
        command: String,
        status: Option<i32>,
        stderr: String,
    },
    #[error("missing BRIR coverage: {0}")]
    Coverage(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn exit_status(status: &Option<i32>) -> String {
    status.map_or_else(|| "no exit code".to_string(), |c| format!("exit code {c}"))
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
