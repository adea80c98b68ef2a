//! Deterministic DSP primitives shared by every other module.

mod audio;
mod convolve;
mod delay;
mod mix;
mod stft;
pub mod wav;

pub use audio::MultichannelAudio;
pub use convolve::{convolve, convolve_direct};
pub use delay::{add_fractionally_delayed, fractional_delay, FRACTIONAL_DELAY_TAPS};
pub use mix::{energy, mix_at_snr, noise_scale_for_snr, snr_db};
pub use stft::{stft, Spectrogram, StftConfig, WindowKind};
