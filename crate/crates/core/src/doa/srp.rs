use rayon::prelude::*;
use realfft::num_complex::Complex64;
use realfft::RealFftPlanner;

use super::{DoaGrid, SectorScores};
use crate::dsp::Spectrogram;
use crate::spatial::{Direction, HrirSet};
use crate::{Error, Result};

/// Frequency range accumulated by [`srp_phat`].
pub const SRP_BAND_HZ: (f64, f64) = (200.0, 7000.0);

/// Unit-modulus HRTFs `[sector][bin][channel]` for the horizontal grid,
/// computed at the STFT's FFT size.
#[derive(Debug, Clone)]
pub struct SteeringVectors {
    n_channels: usize,
    bins: Vec<usize>,
    /// `[sector][band bin][channel]`, conjugated.
    data: Vec<Complex64>,
}

impl SteeringVectors {
    pub fn new(
        hrirs: &HrirSet,
        grid: &DoaGrid,
        fft_size: usize,
        sample_rate_hz: u32,
    ) -> Result<Self> {
        if hrirs.sample_rate_hz() != sample_rate_hz {
            return Err(Error::invalid(format!(
                "HRIRs at {} Hz, signal at {sample_rate_hz} Hz",
                hrirs.sample_rate_hz()
            )));
        }
        let df = f64::from(sample_rate_hz) / fft_size as f64;
        let bins: Vec<usize> = (0..=fft_size / 2)
            .filter(|&k| {
                let f = k as f64 * df;
                f >= SRP_BAND_HZ.0 && f <= SRP_BAND_HZ.1
            })
            .collect();
        let n_ch = hrirs.n_channels();
        let mut planner = RealFftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(fft_size);
        let mut input = fft.make_input_vec();
        let mut spectra = vec![fft.make_output_vec(); n_ch];
        let mut data = Vec::with_capacity(grid.n_sectors() * bins.len() * n_ch);
        for i in 0..grid.n_sectors() {
            let dir = Direction::horizontal(grid.sector_azimuth_deg(i));
            let d = hrirs.find(&dir).ok_or(Error::MissingDirection {
                azimuth_deg: dir.azimuth_deg,
                elevation_deg: 0.0,
            })?;
            for (c, spec) in spectra.iter_mut().enumerate() {
                input.iter_mut().for_each(|x| *x = 0.0);
                let ir = hrirs.ir(d, c);
                let n = ir.len().min(fft_size);
                input[..n].copy_from_slice(&ir[..n]);
                fft.process(&mut input, spec).expect("planned sizes");
            }
            for &k in &bins {
                for spec in &spectra {
                    data.push(unit(spec[k]).conj());
                }
            }
        }
        Ok(Self {
            n_channels: n_ch,
            bins,
            data,
        })
    }

    fn sector(&self, i: usize) -> &[Complex64] {
        let len = self.bins.len() * self.n_channels;
        &self.data[i * len..(i + 1) * len]
    }
}

fn unit(z: Complex64) -> Complex64 {
    let a = z.norm();
    if a > 0.0 {
        z / a
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Steered response power with phase transform.
///
/// For each frame and sector, sums over microphone pairs `p < q` and bins in
/// 200 Hz - 7 kHz the real part of the PHAT-weighted cross-spectrum
/// `Y_p Y_q* / |Y_p Y_q|` steered by the conjugate sector HRTF phase
/// difference. Evaluated as `(|sum_c Yc^ Hc^*|^2 - sum_c |Yc^|^2 |Hc^|^2) / 2`
/// with unit-modulus `^` terms.
pub fn srp_phat(spec: &Spectrogram, hrirs: &HrirSet, grid: &DoaGrid) -> Result<SectorScores> {
    let steering =
        SteeringVectors::new(hrirs, grid, spec.config().fft_size, spec.sample_rate_hz())?;
    srp_phat_with(spec, &steering, grid)
}

/// [`srp_phat`] with precomputed steering vectors.
pub fn srp_phat_with(
    spec: &Spectrogram,
    steering: &SteeringVectors,
    grid: &DoaGrid,
) -> Result<SectorScores> {
    let n_ch = spec.n_channels();
    if n_ch != steering.n_channels {
        return Err(Error::ShapeMismatch(format!(
            "spectrogram has {n_ch} channels, steering vectors {}",
            steering.n_channels
        )));
    }
    let n_sec = grid.n_sectors();
    let nb = steering.bins.len();
    let mut data = vec![0.0; spec.n_frames() * n_sec];
    data.par_chunks_mut(n_sec).enumerate().for_each(|(m, row)| {
        // whitened observations [bin][channel]
        let mut obs = Vec::with_capacity(nb * n_ch);
        for &k in &steering.bins {
            for c in 0..n_ch {
                obs.push(unit(spec.get(c, m, k)));
            }
        }
        for (i, score) in row.iter_mut().enumerate() {
            let h = steering.sector(i);
            let mut total = 0.0;
            for (y, hh) in obs.chunks_exact(n_ch).zip(h.chunks_exact(n_ch)) {
                let mut z = Complex64::new(0.0, 0.0);
                let mut diag = 0.0;
                for (a, b) in y.iter().zip(hh) {
                    let t = a * b;
                    z += t;
                    diag += t.norm_sqr();
                }
                total += 0.5 * (z.norm_sqr() - diag);
            }
            *score = total;
        }
    });
    SectorScores::from_rows(data, spec.n_frames())
}
