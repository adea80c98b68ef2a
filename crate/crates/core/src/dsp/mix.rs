use super::MultichannelAudio;
use crate::{Error, Result};

/// Sum of squared samples over all channels.
pub fn energy(audio: &MultichannelAudio) -> f64 {
    audio.channels().iter().flatten().map(|x| x * x).sum()
}

/// Amplitude factor that brings noise of energy `noise_energy` to
/// `snr_db` below a clean signal of energy `clean_energy`.
pub fn noise_scale_for_snr(clean_energy: f64, noise_energy: f64, snr_db: f64) -> f64 {
    (clean_energy / (noise_energy * 10f64.powf(snr_db / 10.0))).sqrt()
}

/// SNR in dB between a clean signal and a noise signal, energies taken over all
/// channels jointly.
pub fn snr_db(clean: &MultichannelAudio, noise: &MultichannelAudio) -> f64 {
    10.0 * (energy(clean) / energy(noise)).log10()
}

/// Adds `noise` to `clean` at the requested SNR, measured jointly over all
/// channels and samples. `f64::INFINITY` means "no noise" and returns `clean`
/// unchanged.
pub fn mix_at_snr(
    clean: &MultichannelAudio,
    noise: &MultichannelAudio,
    snr_db: f64,
) -> Result<MultichannelAudio> {
    if clean.n_channels() != noise.n_channels() || clean.n_samples() != noise.n_samples() {
        return Err(Error::ShapeMismatch(format!(
            "clean is {}x{}, noise is {}x{}",
            clean.n_channels(),
            clean.n_samples(),
            noise.n_channels(),
            noise.n_samples()
        )));
    }
    if clean.sample_rate_hz() != noise.sample_rate_hz() {
        return Err(Error::invalid("clean and noise sample rates differ"));
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::invalid(format!("invalid SNR {snr_db}")));
    }
    let ec = energy(clean);
    if ec == 0.0 {
        return Err(Error::ZeroEnergy("clean"));
    }
    if snr_db == f64::INFINITY {
        return Ok(clean.clone());
    }
    let en = energy(noise);
    if en == 0.0 {
        return Err(Error::ZeroEnergy("noise"));
    }
    let g = noise_scale_for_snr(ec, en, snr_db);
    let channels = clean
        .channels()
        .iter()
        .zip(noise.channels())
        .map(|(c, n)| c.iter().zip(n).map(|(a, b)| a + g * b).collect())
        .collect();
    MultichannelAudio::new(channels, clean.sample_rate_hz())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_audio(ch: usize, n: usize, seed: u64) -> MultichannelAudio {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let channels = (0..ch)
            .map(|_| (0..n).map(|_| rng.random_range(-0.5..0.5)).collect())
            .collect();
        MultichannelAudio::new(channels, 16000).unwrap()
    }

    fn difference(a: &MultichannelAudio, b: &MultichannelAudio) -> MultichannelAudio {
        let channels = a
            .channels()
            .iter()
            .zip(b.channels())
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect())
            .collect();
        MultichannelAudio::new(channels, a.sample_rate_hz()).unwrap()
    }

    #[test]
    fn zero_db_equalises_energies() {
        let clean = random_audio(6, 1000, 1);
        let noise = random_audio(6, 1000, 2);
        let mixed = mix_at_snr(&clean, &noise, 0.0).unwrap();
        let scaled_noise = difference(&mixed, &clean);
        let rel = (energy(&scaled_noise) - energy(&clean)).abs() / energy(&clean);
        assert!(rel < 1e-9, "{rel}");
    }

    #[test]
    fn infinite_snr_is_bit_exact_passthrough() {
        let clean = random_audio(6, 500, 3);
        let noise = random_audio(6, 500, 4);
        assert_eq!(mix_at_snr(&clean, &noise, f64::INFINITY).unwrap(), clean);
    }

    #[test]
    fn closed_form_scale_factor() {
        // E_clean = 4, E_noise = 1, 10 dB -> sqrt(4 / (10 * 1))
        assert!((noise_scale_for_snr(4.0, 1.0, 10.0) - (0.4f64).sqrt()).abs() < 1e-15);
        let clean = MultichannelAudio::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]], 16000).unwrap();
        let noise = MultichannelAudio::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]], 16000).unwrap();
        let mixed = mix_at_snr(&clean, &noise, 10.0).unwrap();
        assert!((mixed.channel(0)[0] - 1.0 - 0.4f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_energy_inputs_are_rejected() {
        let zeros = MultichannelAudio::zeros(2, 10, 16000);
        let noise = random_audio(2, 10, 5);
        assert!(matches!(
            mix_at_snr(&zeros, &noise, 5.0),
            Err(Error::ZeroEnergy("clean"))
        ));
        assert!(matches!(
            mix_at_snr(&noise, &zeros, 5.0),
            Err(Error::ZeroEnergy("noise"))
        ));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let a = random_audio(2, 10, 6);
        let b = random_audio(2, 11, 7);
        assert!(mix_at_snr(&a, &b, 5.0).is_err());
    }

    proptest! {
        #[test]
        fn measured_snr_matches_request(seed in 0u64..500, snr in -10.0f64..40.0) {
            let clean = random_audio(3, 400, seed);
            let noise = random_audio(3, 400, seed + 1000);
            let mixed = mix_at_snr(&clean, &noise, snr).unwrap();
            let measured = snr_db(&clean, &difference(&mixed, &clean));
            prop_assert!((measured - snr).abs() < 0.01);
        }
    }
}
