use rand_distr::{Distribution, StandardNormal};
use realfft::num_complex::Complex64;
use realfft::RealFftPlanner;

use crate::dsp::MultichannelAudio;
use crate::spatial::HrirSet;
use crate::util::rng;
use crate::{Error, Result};

/// Spatially diffuse, temporally white noise rendered through an HRIR set:
/// every grid direction radiates an independent white-noise sequence, filtered
/// by that direction's responses and summed per channel.
///
/// Synthesis is circular in the frequency domain, so the field is stationary
/// over the whole output with no start-up transient. HRTFs are cached per
/// output length, making repeated generation cheap.
pub struct DiffuseNoiseGenerator {
    n_samples: usize,
    n_channels: usize,
    sample_rate_hz: u32,
    /// `[direction][channel]` spectra of length `n_samples / 2 + 1`.
    transfer: Vec<Vec<Vec<Complex64>>>,
}

impl DiffuseNoiseGenerator {
    pub fn new(hrirs: &HrirSet, n_samples: usize) -> Result<Self> {
        if hrirs.is_empty() {
            return Err(Error::invalid("HRIR grid is empty"));
        }
        if n_samples < 2 {
            return Err(Error::invalid("diffuse noise needs at least two samples"));
        }
        if hrirs.ir_length() > n_samples {
            return Err(Error::invalid("noise shorter than the HRIRs"));
        }
        let mut planner = RealFftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(n_samples);
        let mut input = fft.make_input_vec();
        let transfer = (0..hrirs.len())
            .map(|d| {
                (0..hrirs.n_channels())
                    .map(|c| {
                        input.iter_mut().for_each(|x| *x = 0.0);
                        input[..hrirs.ir_length()].copy_from_slice(hrirs.ir(d, c));
                        let mut out = fft.make_output_vec();
                        fft.process(&mut input, &mut out).expect("planned sizes");
                        out
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            n_samples,
            n_channels: hrirs.n_channels(),
            sample_rate_hz: hrirs.sample_rate_hz(),
            transfer,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// One realisation, scaled to a total energy (all channels) of one unit
    /// per second of signal.
    pub fn generate(&self, seed: u64) -> MultichannelAudio {
        let n = self.n_samples;
        let n_bins = n / 2 + 1;
        let mut rng = rng(seed);
        let mut acc = vec![vec![Complex64::new(0.0, 0.0); n_bins]; self.n_channels];
        for per_dir in &self.transfer {
            // DFT of a white Gaussian sequence: real DC (and Nyquist for even n).
            let white: Vec<Complex64> = (0..n_bins)
                .map(|k| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    if k == 0 || (n.is_multiple_of(2) && k == n_bins - 1) {
                        Complex64::new(re * std::f64::consts::SQRT_2, 0.0)
                    } else {
                        Complex64::new(re, im)
                    }
                })
                .collect();
            for (a, h) in acc.iter_mut().zip(per_dir) {
                for ((y, w), t) in a.iter_mut().zip(&white).zip(h) {
                    *y += w * t;
                }
            }
        }
        let mut planner = RealFftPlanner::<f64>::new();
        let ifft = planner.plan_fft_inverse(n);
        let mut channels: Vec<Vec<f64>> = acc
            .into_iter()
            .map(|mut spec| {
                spec[0].im = 0.0;
                if n.is_multiple_of(2) {
                    spec[n_bins - 1].im = 0.0;
                }
                let mut out = ifft.make_output_vec();
                ifft.process(&mut spec, &mut out).expect("planned sizes");
                out
            })
            .collect();
        let energy: f64 = channels.iter().flatten().map(|x| x * x).sum();
        let duration = n as f64 / f64::from(self.sample_rate_hz);
        if energy > 0.0 {
            let g = (duration / energy).sqrt();
            channels.iter_mut().flatten().for_each(|x| *x *= g);
        }
        MultichannelAudio::new(channels, self.sample_rate_hz).expect("finite by construction")
    }
}

/// Convenience wrapper over [`DiffuseNoiseGenerator`].
pub fn generate_diffuse_noise(
    hrirs: &HrirSet,
    duration_s: f64,
    seed: u64,
) -> Result<MultichannelAudio> {
    if !(duration_s > 0.0) {
        return Err(Error::invalid("duration must be positive"));
    }
    let n = (duration_s * f64::from(hrirs.sample_rate_hz())).round() as usize;
    Ok(DiffuseNoiseGenerator::new(hrirs, n)?.generate(seed))
}
