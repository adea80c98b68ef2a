use std::f64::consts::PI;

use realfft::num_complex::Complex64;
use realfft::RealFftPlanner;
use serde::{Deserialize, Serialize};

use super::MultichannelAudio;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    SqrtHann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StftConfig {
    pub fft_size: usize,
    pub window_size: usize,
    pub hop_size: usize,
    pub window_kind: WindowKind,
}

impl Default for StftConfig {
    /// 512-point FFT, 512-sample sqrt-Hann window, 10 ms hop at 16 kHz.
    fn default() -> Self {
        Self {
            fft_size: 512,
            window_size: 512,
            hop_size: 160,
            window_kind: WindowKind::SqrtHann,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hop_size == 0
            || self.hop_size > self.window_size
            || self.window_size > self.fft_size
        {
            return Err(Error::invalid(format!(
                "STFT requires 0 < hop ({}) <= window ({}) <= fft ({})",
                self.hop_size, self.window_size, self.fft_size
            )));
        }
        if !self.fft_size.is_multiple_of(2) {
            return Err(Error::invalid("fft_size must be even"));
        }
        Ok(())
    }

    /// Number of one-sided frequency bins, `fft_size / 2 + 1`.
    pub fn n_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Number of complete frames for a signal of `n_samples`, or 0 if the
    /// signal is shorter than one window.
    pub fn n_frames(&self, n_samples: usize) -> usize {
        if n_samples < self.window_size {
            0
        } else {
            (n_samples - self.window_size) / self.hop_size + 1
        }
    }

    /// Minimum signal length that yields exactly `n_frames` frames.
    pub fn samples_for_frames(&self, n_frames: usize) -> usize {
        if n_frames == 0 {
            0
        } else {
            self.window_size + (n_frames - 1) * self.hop_size
        }
    }

    pub fn window(&self) -> Vec<f64> {
        let n = self.window_size as f64;
        match self.window_kind {
            WindowKind::SqrtHann => (0..self.window_size)
                .map(|i| (0.5 - 0.5 * (2.0 * PI * i as f64 / n).cos()).sqrt())
                .collect(),
        }
    }

    /// Centre frequency of bin `k` in Hz.
    pub fn bin_frequency(&self, k: usize, sample_rate_hz: u32) -> f64 {
        k as f64 * f64::from(sample_rate_hz) / self.fft_size as f64
    }
}

/// One-sided complex STFT of a multichannel signal, stored channel-major as
/// `[channel][frame][bin]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    bins: Vec<Complex64>,
    n_channels: usize,
    n_frames: usize,
    config: StftConfig,
    sample_rate_hz: u32,
}

impl Spectrogram {
    pub fn from_parts(
        bins: Vec<Complex64>,
        n_channels: usize,
        n_frames: usize,
        config: StftConfig,
        sample_rate_hz: u32,
    ) -> Result<Self> {
        config.validate()?;
        if bins.len() != n_channels * n_frames * config.n_bins() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} x {} x {} bins, got {}",
                n_channels,
                n_frames,
                config.n_bins(),
                bins.len()
            )));
        }
        Ok(Self {
            bins,
            n_channels,
            n_frames,
            config,
            sample_rate_hz,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_bins(&self) -> usize {
        self.config.n_bins()
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// The K' bins of one channel and frame.
    pub fn frame(&self, channel: usize, frame: usize) -> &[Complex64] {
        let k = self.n_bins();
        let start = (channel * self.n_frames + frame) * k;
        &self.bins[start..start + k]
    }

    pub fn get(&self, channel: usize, frame: usize, bin: usize) -> Complex64 {
        self.frame(channel, frame)[bin]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn map_bins(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            bins: self.bins.iter().map(|&z| f(z)).collect(),
            ..self.clone()
        }
    }
}

/// Per-channel one-sided STFT. Frames start at multiples of the hop; no
/// padding is applied, so the frame count is
/// `floor((n_samples - window) / hop) + 1`.
pub fn stft(audio: &MultichannelAudio, config: &StftConfig) -> Result<Spectrogram> {
    config.validate()?;
    if audio.n_channels() == 0 {
        return Err(Error::invalid("audio has no channels"));
    }
    let n_frames = config.n_frames(audio.n_samples());
    if n_frames == 0 {
        return Err(Error::InsufficientSamples {
            needed: config.window_size,
            got: audio.n_samples(),
        });
    }
    let window = config.window();
    let k = config.n_bins();
    let offset = (config.fft_size - config.window_size) / 2;
    let mut planner = RealFftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(config.fft_size);
    let mut input = fft.make_input_vec();
    let mut output = fft.make_output_vec();
    let mut scratch = fft.make_scratch_vec();

    let mut bins = Vec::with_capacity(audio.n_channels() * n_frames * k);
    for ch in audio.channels() {
        for m in 0..n_frames {
            let start = m * config.hop_size;
            input.iter_mut().for_each(|x| *x = 0.0);
            for (i, (&x, &w)) in ch[start..start + config.window_size]
                .iter()
                .zip(&window)
                .enumerate()
            {
                input[offset + i] = x * w;
            }
            fft.process_with_scratch(&mut input, &mut output, &mut scratch)
                .expect("buffer sizes come from the plan");
            bins.extend_from_slice(&output);
        }
    }
    Ok(Spectrogram {
        bins,
        n_channels: audio.n_channels(),
        n_frames,
        config: *config,
        sample_rate_hz: audio.sample_rate_hz(),
    })
}
