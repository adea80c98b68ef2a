use crate::{Error, Result};

/// Time-domain multichannel signal at a fixed sample rate.
///
/// All channels have the same length and hold finite samples; full scale is
/// +-1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelAudio {
    channels: Vec<Vec<f64>>,
    sample_rate_hz: u32,
}

impl MultichannelAudio {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if let Some(first) = channels.first() {
            let len = first.len();
            if channels.iter().any(|c| c.len() != len) {
                return Err(Error::ShapeMismatch(
                    "all channels must have equal length".into(),
                ));
            }
        }
        if channels.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("audio contains non-finite samples"));
        }
        Ok(Self {
            channels,
            sample_rate_hz,
        })
    }

    pub fn zeros(n_channels: usize, n_samples: usize, sample_rate_hz: u32) -> Self {
        Self {
            channels: vec![vec![0.0; n_samples]; n_channels],
            sample_rate_hz,
        }
    }

    pub fn mono(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        Self::new(vec![samples], sample_rate_hz)
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / f64::from(self.sample_rate_hz)
    }

    pub fn is_empty(&self) -> bool {
        self.n_channels() == 0 || self.n_samples() == 0
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channel_mut(&mut self, index: usize) -> &mut [f64] {
        &mut self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    pub fn peak(&self) -> f64 {
        self.channels
            .iter()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Multiplies every sample by `gain`.
    pub fn scale(&mut self, gain: f64) {
        for x in self.channels.iter_mut().flatten() {
            *x *= gain;
        }
    }

    /// Scales all channels jointly so the peak equals `target`; silent input is
    /// left untouched. Inter-channel level ratios are preserved.
    pub fn normalize_peak(&mut self, target: f64) {
        let peak = self.peak();
        if peak > 0.0 {
            self.scale(target / peak);
        }
    }

    /// Zero-pads or truncates every channel to `n_samples`.
    pub fn resized(&self, n_samples: usize) -> Self {
        let channels = self
            .channels
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.resize(n_samples, 0.0);
                c
            })
            .collect();
        Self {
            channels,
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    /// Returns a new signal holding the listed channels in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let channels = indices
            .iter()
            .map(|&i| {
                self.channels
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("channel {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            channels,
            sample_rate_hz: self.sample_rate_hz,
        })
    }
}
