//! Lossy codec round trips and the binaural data-exchange topologies.

mod external;
mod mdct;
mod metrics;
mod reference;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dsp::MultichannelAudio;
use crate::spatial::Side;
use crate::{Error, Result, N_MICS};

pub use external::{ExternalCodecConfig, CODEC_BIN_ENV};
pub use metrics::segmental_snr_db;
pub use reference::{EncodedStream, ReferenceCodec};

/// Bitrates used in the codec experiments, per coded channel.
pub const STANDARD_BITRATES_BPS: [u32; 3] = [16_000, 32_000, 64_000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodecKind {
    Identity,
    ReferenceLossy,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodecConfig {
    pub kind: CodecKind,
    /// Per coded channel.
    pub bitrate_bps: u32,
    pub frame_ms: f64,
    pub external: Option<ExternalCodecConfig>,
    /// Delay of the external codec, removed from its output.
    pub algorithmic_delay_samples: usize,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            kind: CodecKind::ReferenceLossy,
            bitrate_bps: 32_000,
            frame_ms: 10.0,
            external: None,
            algorithmic_delay_samples: 0,
        }
    }
}

impl CodecConfig {
    pub fn identity() -> Self {
        Self {
            kind: CodecKind::Identity,
            ..Self::default()
        }
    }

    pub fn reference(bitrate_bps: u32) -> Self {
        Self {
            kind: CodecKind::ReferenceLossy,
            bitrate_bps,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            CodecKind::Identity => Ok(()),
            CodecKind::ReferenceLossy => {
                if self.frame_ms != 10.0 {
                    return Err(Error::Config(format!(
                        "reference codec uses 10 ms frames, not {}",
                        self.frame_ms
                    )));
                }
                ReferenceCodec::new(self.bitrate_bps, ReferenceCodec::SAMPLE_RATE_HZ).map(|_| ())
            }
            CodecKind::External => match &self.external {
                Some(e) if !e.encode.trim().is_empty() && !e.decode.trim().is_empty() => Ok(()),
                _ => Err(Error::Config(
                    "external codec needs encode and decode templates".into(),
                )),
            },
        }
    }

    /// Short identifier recorded in derived dataset manifests.
    pub fn tag(&self) -> String {
        match self.kind {
            CodecKind::Identity => "identity".into(),
            CodecKind::ReferenceLossy => format!("reference-lossy@{}", self.bitrate_bps),
            CodecKind::External => format!("external@{}", self.bitrate_bps),
        }
    }
}

/// Encode and decode one channel. The output has the input's length and is
/// time-aligned with it.
pub fn codec_roundtrip(
    samples: &[f64],
    sample_rate_hz: u32,
    config: &CodecConfig,
) -> Result<Vec<f64>> {
    match config.kind {
        CodecKind::Identity => Ok(samples.to_vec()),
        CodecKind::ReferenceLossy => {
            ReferenceCodec::new(config.bitrate_bps, sample_rate_hz)?.roundtrip(samples)
        }
        CodecKind::External => {
            let ext = config
                .external
                .as_ref()
                .ok_or_else(|| Error::Config("external codec without templates".into()))?;
            external::external_roundtrip(
                samples,
                sample_rate_hz,
                config.bitrate_bps,
                config.algorithmic_delay_samples,
                ext,
            )
        }
    }
}

/// Which microphone signals pass through the codec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Topology {
    #[default]
    None,
    /// The contralateral device streams its three channels to the ear on
    /// `processing` side.
    Encode3 { processing: Side },
    /// Both devices stream all six channels to a central processor.
    Encode6,
}

impl Topology {
    /// Indices (in L_Fr, L_Mid, L_Rear, R_Fr, R_Mid, R_Rear order) of the
    /// coded channels.
    pub fn coded_channels(&self) -> Vec<usize> {
        match self {
            Topology::None => Vec::new(),
            Topology::Encode3 {
                processing: Side::Right,
            } => vec![0, 1, 2],
            Topology::Encode3 {
                processing: Side::Left,
            } => vec![3, 4, 5],
            Topology::Encode6 => (0..N_MICS).collect(),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::None => f.write_str("none"),
            Topology::Encode3 {
                processing: Side::Right,
            } => f.write_str("encode-3-right"),
            Topology::Encode3 {
                processing: Side::Left,
            } => f.write_str("encode-3-left"),
            Topology::Encode6 => f.write_str("encode-6"),
        }
    }
}

impl FromStr for Topology {
    type Err = Error;

    /// `none`, `encode-3` (right-ear processing), `encode-3-right`,
    /// `encode-3-left` or `encode-6`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Topology::None),
            "encode-3" | "encode-3-right" => Ok(Topology::Encode3 {
                processing: Side::Right,
            }),
            "encode-3-left" => Ok(Topology::Encode3 {
                processing: Side::Left,
            }),
            "encode-6" => Ok(Topology::Encode6),
            _ => Err(Error::Config(format!("unknown topology {s:?}"))),
        }
    }
}

impl Serialize for Topology {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Topology {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Runs the coded channels of a six-channel signal through the codec, in
/// parallel; the other channels are copied unchanged.
pub fn apply_topology(
    audio: &MultichannelAudio,
    topology: Topology,
    config: &CodecConfig,
) -> Result<MultichannelAudio> {
    if audio.n_channels() != N_MICS {
        return Err(Error::ShapeMismatch(format!(
            "topologies need {N_MICS} channels, got {}",
            audio.n_channels()
        )));
    }
    let coded = topology.coded_channels();
    let fs = audio.sample_rate_hz();
    let channels = (0..N_MICS)
        .into_par_iter()
        .map(|c| {
            if coded.contains(&c) {
                codec_roundtrip(audio.channel(c), fs, config)
            } else {
                Ok(audio.channel(c).to_vec())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    MultichannelAudio::new(channels, fs)
}
