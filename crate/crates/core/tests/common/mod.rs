#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use binaural_doa::acoustics::{
    render_brir, ArrayPose, Brir, BrirConfig, DiffuseNoiseGenerator, Room,
};
use binaural_doa::dsp::MultichannelAudio;
use binaural_doa::scenegen::{
    render_segment, ActivityInterval, ActivityTimeline, DoaLabelGrid, SegmentConfig, SpeechCorpus,
};
use binaural_doa::spatial::{horizontal_grid, synth_spherical_head, BteArrayGeometry, HrirSet};
use realfft::num_complex::Complex64;
use realfft::RealFftPlanner;

pub fn head_hrirs() -> HrirSet {
    synth_spherical_head(
        &horizontal_grid(5.0),
        &BteArrayGeometry::default(),
        256,
        16000,
    )
    .unwrap()
}

pub fn peak_index(x: &[f64]) -> usize {
    (0..x.len())
        .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
        .unwrap()
}

pub fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Decay time from the backward-integrated energy curve: a least-squares line
/// through the -5..-35 dB part, extrapolated to -60 dB.
pub fn schroeder_t30(ir: &[f64], fs: f64) -> f64 {
    let mut edc = vec![0.0; ir.len()];
    let mut acc = 0.0;
    for i in (0..ir.len()).rev() {
        acc += ir[i] * ir[i];
        edc[i] = acc;
    }
    let db: Vec<f64> = edc.iter().map(|e| 10.0 * (e / edc[0]).log10()).collect();
    let pts: Vec<(f64, f64)> = db
        .iter()
        .enumerate()
        .filter(|(_, &d)| (-35.0..=-5.0).contains(&d))
        .map(|(i, &d)| (i as f64 / fs, d))
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    -60.0 / slope
}

/// Welch magnitude-squared coherence between two signals with a Hann window,
/// 50 % overlap. Returns one value per bin `0..=n/2`.
pub fn msc(x: &[f64], y: &[f64], n: usize) -> Vec<f64> {
    let mut planner = RealFftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let w: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect();
    let bins = n / 2 + 1;
    let (mut sxx, mut syy) = (vec![0.0; bins], vec![0.0; bins]);
    let mut sxy = vec![Complex64::new(0.0, 0.0); bins];
    let mut start = 0;
    while start + n <= x.len() {
        let spec = |s: &[f64]| {
            let mut buf: Vec<f64> = s[start..start + n]
                .iter()
                .zip(&w)
                .map(|(a, b)| a * b)
                .collect();
            let mut out = fft.make_output_vec();
            fft.process(&mut buf, &mut out).unwrap();
            out
        };
        let (a, b) = (spec(x), spec(y));
        for k in 0..bins {
            sxx[k] += a[k].norm_sqr();
            syy[k] += b[k].norm_sqr();
            sxy[k] += a[k] * b[k].conj();
        }
        start += n / 2;
    }
    (0..bins)
        .map(|k| sxy[k].norm_sqr() / (sxx[k] * syy[k]))
        .collect()
}

/// A 2 s segment with one source active throughout at `azimuth_deg`, 1.5 m
/// away in a free field, rendered through the spherical-head HRIRs.
pub fn anechoic_segment(
    hrirs: &HrirSet,
    corpus: &SpeechCorpus,
    noise: &DiffuseNoiseGenerator,
    azimuth_deg: f64,
    seed: u64,
) -> (MultichannelAudio, DoaLabelGrid) {
    let room = Room::anechoic("free", [12.0, 12.0, 3.0]);
    let pose = ArrayPose {
        head_center_m: [6.0, 6.0, 1.5],
        yaw_deg: 0.0,
    };
    let a = azimuth_deg.to_radians();
    let src = [6.0 + 1.5 * a.cos(), 6.0 + 1.5 * a.sin(), 1.5];
    let brir: Arc<Brir> =
        Arc::new(render_brir(&room, src, &pose, hrirs, &BrirConfig::default()).unwrap());
    let timeline = ActivityTimeline {
        segment_s: 2.0,
        slots: vec![vec![ActivityInterval {
            start_s: 0.0,
            end_s: 2.0,
            brir: 0,
        }]],
    };
    render_segment(
        &timeline,
        &[brir],
        corpus,
        None,
        noise,
        &SegmentConfig::default(),
        seed,
    )
    .unwrap()
}

pub fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// Pipeline settings for a small bank (R14, one pose, 30 degree grid, 1 m)
/// rooted at `dir`, plus any extra overrides.
pub fn small_config(dir: &Path, extra: &[&str]) -> binaural_doa::pipeline::PipelineConfig {
    let mut o: Vec<String> = vec![
        format!("paths.bank_dir={}", dir.join("bank").display()),
        format!("paths.dataset_dir={}", dir.join("dataset").display()),
        "corpus.n_utterances=6".into(),
        "corpus.duration_s=2.5".into(),
        "bank.rooms=[\"R14\"]".into(),
        "bank.n_poses=1".into(),
        "bank.azimuth_step_deg=30.0".into(),
        "bank.distances=[{meters = 1.0}]".into(),
        "dataset.rooms=[\"R14\"]".into(),
        "dataset.n_segments=6".into(),
        "dataset.seed=7".into(),
    ];
    o.extend(extra.iter().map(|s| s.to_string()));
    binaural_doa::pipeline::PipelineConfig::load(None, &o).unwrap()
}
