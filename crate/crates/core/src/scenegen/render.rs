use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::activity::ActivityTimeline;
use super::corpus::SpeechCorpus;
use super::labels::{azimuth_class, DoaLabelGrid};
use crate::acoustics::{Brir, DiffuseNoiseGenerator};
use crate::dsp::{convolve, energy, mix_at_snr, MultichannelAudio, StftConfig};
use crate::util::{derive_seed, rng};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentConfig {
    pub segment_s: f64,
    pub stft: StftConfig,
    /// Output peak after the final normalisation.
    pub peak_level: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            segment_s: 2.0,
            stft: StftConfig::default(),
            peak_level: 0.9,
        }
    }
}

/// Renders one multichannel mixture and its frame labels.
///
/// Every activity interval plays an excerpt from `corpus` through its BRIR,
/// starting at the interval onset; reverberant tails are kept up to the end of
/// the segment. Diffuse noise is added at `snr_db` (`None` for no noise). A
/// segment without active sources is pure noise. The mixture is finally
/// peak-normalised.
pub fn render_segment(
    timeline: &ActivityTimeline,
    brirs: &[Arc<Brir>],
    corpus: &SpeechCorpus,
    snr_db: Option<f64>,
    noise: &DiffuseNoiseGenerator,
    config: &SegmentConfig,
    seed: u64,
) -> Result<(MultichannelAudio, DoaLabelGrid)> {
    let fs = corpus.sample_rate_hz();
    let n = (config.segment_s * f64::from(fs)).round() as usize;
    if noise.n_samples() != n || noise.sample_rate_hz() != fs {
        return Err(Error::ShapeMismatch(format!(
            "noise generator is {} samples at {} Hz, segment is {n} at {fs} Hz",
            noise.n_samples(),
            noise.sample_rate_hz()
        )));
    }
    let n_ch = noise.n_channels();
    let mut clean = MultichannelAudio::zeros(n_ch, n, fs);
    let mut active = Vec::new();
    let mut r = rng(seed);
    for iv in timeline.intervals() {
        let brir = brirs
            .get(iv.brir)
            .ok_or_else(|| Error::invalid(format!("timeline refers to BRIR {}", iv.brir)))?;
        if brir.ir.n_channels() != n_ch || brir.ir.sample_rate_hz() != fs {
            return Err(Error::ShapeMismatch(format!(
                "BRIR has {} channels at {} Hz, expected {n_ch} at {fs} Hz",
                brir.ir.n_channels(),
                brir.ir.sample_rate_hz()
            )));
        }
        let start = ((iv.start_s * f64::from(fs)).round() as usize).min(n);
        let end = ((iv.end_s * f64::from(fs)).round() as usize).min(n);
        if end <= start {
            continue;
        }
        let dry = corpus.excerpt(end - start, &mut r);
        for c in 0..n_ch {
            let wet = convolve(&dry, brir.ir.channel(c))?;
            let out = clean.channel_mut(c);
            for (o, w) in out[start..].iter_mut().zip(&wet) {
                *o += w;
            }
        }
        active.push((start, end, azimuth_class(brir.source_azimuth_head_deg)));
    }

    let mut mixture = match snr_db {
        None => clean,
        Some(snr) => {
            let noise = noise.generate(derive_seed(seed, 1));
            if energy(&clean) == 0.0 {
                noise
            } else {
                mix_at_snr(&clean, &noise, snr)?
            }
        }
    };
    if mixture.peak() > 0.0 {
        mixture.normalize_peak(config.peak_level);
    }
    let labels = DoaLabelGrid::from_activity(&active, config.stft.n_frames(n), &config.stft)?;
    Ok((mixture, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::snr_db;
    use crate::scenegen::ActivityInterval;
    use crate::spatial::{horizontal_grid, synth_free_field};

    fn delta_brir(az: f64, delay: usize) -> Arc<Brir> {
        let mut ch = vec![0.0; 64];
        ch[delay] = 1.0;
        Arc::new(Brir {
            ir: MultichannelAudio::new(vec![ch; 6], 16000).unwrap(),
            source_azimuth_room_deg: az,
            source_azimuth_head_deg: az,
            source_distance_m: 1.0,
            room_id: "t".into(),
        })
    }

    fn noise_gen(n: usize) -> DiffuseNoiseGenerator {
        let hr = synth_free_field(&horizontal_grid(30.0), &[[0.0; 3]; 6], 2.0, 16, 16000).unwrap();
        DiffuseNoiseGenerator::new(&hr, n).unwrap()
    }

    fn one_source(start_s: f64, end_s: f64) -> ActivityTimeline {
        ActivityTimeline {
            segment_s: 0.5,
            slots: vec![vec![ActivityInterval {
                start_s,
                end_s,
                brir: 0,
            }]],
        }
    }

    #[test]
    fn clean_single_source_is_the_delayed_excerpt() {
        let corpus = SpeechCorpus::new(
            vec![(0..8000).map(|i| (i as f64 * 0.01).sin()).collect()],
            16000,
            "t",
        )
        .unwrap();
        let cfg = SegmentConfig {
            segment_s: 0.5,
            ..SegmentConfig::default()
        };
        let (mix, labels) = render_segment(
            &one_source(0.0, 0.5),
            &[delta_brir(90.0, 3)],
            &corpus,
            None,
            &noise_gen(8000),
            &cfg,
            5,
        )
        .unwrap();
        assert_eq!(mix.n_channels(), 6);
        assert_eq!(mix.n_samples(), 8000);
        assert!((mix.peak() - 0.9).abs() < 1e-12);
        let ch = mix.channel(0);
        assert!(ch[..3].iter().all(|x| x.abs() < 1e-12));
        assert_eq!(labels.n_frames(), cfg.stft.n_frames(8000));
        for f in 0..labels.n_frames() {
            assert_eq!(labels.active(f), vec![18]);
        }
    }

    #[test]
    fn snr_is_applied_before_normalisation() {
        let corpus = SpeechCorpus::synthetic(2, 1.0, 16000, 1).unwrap();
        let cfg = SegmentConfig {
            segment_s: 0.5,
            ..SegmentConfig::default()
        };
        let gen = noise_gen(8000);
        let tl = one_source(0.0, 0.5);
        let brirs = [delta_brir(0.0, 0)];
        let (clean, _) = render_segment(&tl, &brirs, &corpus, None, &gen, &cfg, 9).unwrap();
        let (noisy, _) = render_segment(&tl, &brirs, &corpus, Some(10.0), &gen, &cfg, 9).unwrap();
        // same excerpt in both renders; recover the residual at matching scale
        let g = {
            let dot: f64 = clean
                .channels()
                .iter()
                .zip(noisy.channels())
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y))
                .sum();
            dot / energy(&clean)
        };
        let mut scaled = clean.clone();
        scaled.scale(g);
        let resid = MultichannelAudio::new(
            scaled
                .channels()
                .iter()
                .zip(noisy.channels())
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| y - x).collect())
                .collect(),
            16000,
        )
        .unwrap();
        // the projection removes the noise component correlated with the clean
        // signal, so only a loose check is meaningful here
        assert!((snr_db(&scaled, &resid) - 10.0).abs() < 0.5);
    }

    #[test]
    fn empty_timeline_gives_noise_and_no_labels() {
        let corpus = SpeechCorpus::synthetic(1, 0.5, 16000, 1).unwrap();
        let cfg = SegmentConfig {
            segment_s: 0.5,
            ..SegmentConfig::default()
        };
        let tl = ActivityTimeline::empty(0.5, 2);
        let (mix, labels) = render_segment(
            &tl,
            &[delta_brir(0.0, 0)],
            &corpus,
            Some(5.0),
            &noise_gen(8000),
            &cfg,
            2,
        )
        .unwrap();
        assert!(mix.peak() > 0.0);
        assert!((0..labels.n_frames()).all(|f| labels.active(f).is_empty()));
        let (silent, _) = render_segment(
            &tl,
            &[delta_brir(0.0, 0)],
            &corpus,
            None,
            &noise_gen(8000),
            &cfg,
            2,
        )
        .unwrap();
        assert_eq!(silent.peak(), 0.0);
    }

    #[test]
    fn deterministic_for_seed() {
        let corpus = SpeechCorpus::synthetic(3, 1.0, 16000, 1).unwrap();
        let cfg = SegmentConfig {
            segment_s: 0.5,
            ..SegmentConfig::default()
        };
        let gen = noise_gen(8000);
        let tl = one_source(0.1, 0.3);
        let a = render_segment(
            &tl,
            &[delta_brir(10.0, 2)],
            &corpus,
            Some(0.0),
            &gen,
            &cfg,
            77,
        )
        .unwrap();
        let b = render_segment(
            &tl,
            &[delta_brir(10.0, 2)],
            &corpus,
            Some(0.0),
            &gen,
            &cfg,
            77,
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
