//! Binaural room acoustics, dataset synthesis, codec-in-the-loop processing and
//! direction-of-arrival evaluation for a six-microphone behind-the-ear array.
//!
//! The crate is organised bottom-up:
//!
//! * [`dsp`] - STFT, convolution, fractional delay, SNR mixing and WAV IO.
//! * [`spatial`] - directions, HRIR sets, the BTE array geometry and an
//!   analytic rigid-sphere HRIR generator.
//! * [`acoustics`] - image-source BRIR rendering on top of an HRIR set and
//!   diffuse noise synthesis.
//! * [`scenegen`] - Markov source activity, segment rendering, multi-hot labels
//!   and on-disk datasets.
//! * [`features`] - the sin/cos phase + normalised magnitude network input.
//! * [`codec`] - lossy codec round trips and the 3/6-channel exchange topologies.
//! * [`doa`] - the 72-sector grid, SRP-PHAT, top-k decoding and accuracy reports.
//! * [`pipeline`] - configuration and the batch commands behind the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustics;
pub mod codec;
pub mod doa;
pub mod dsp;
mod error;
pub mod features;
pub mod pipeline;
pub mod scenegen;
pub mod spatial;
pub(crate) mod util;

pub use error::{Error, Result};

/// Sampling rate of every signal in the processing pipeline.
pub const PIPELINE_SAMPLE_RATE: u32 = 16_000;

/// Speed of sound used throughout, in m/s.
pub const SPEED_OF_SOUND: f64 = 343.0;

/// Number of microphones in the binaural BTE array.
pub const N_MICS: usize = 6;
