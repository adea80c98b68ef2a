use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use walkdir::WalkDir;

use crate::dsp::wav::read_wav;
use crate::util::{rng, sha256_hex};
use crate::{Error, Result};

/// Mono source utterances at a common sample rate.
#[derive(Debug, Clone)]
pub struct SpeechCorpus {
    utterances: Vec<Vec<f64>>,
    sample_rate_hz: u32,
    id: String,
}

impl SpeechCorpus {
    pub fn new(
        utterances: Vec<Vec<f64>>,
        sample_rate_hz: u32,
        id: impl Into<String>,
    ) -> Result<Self> {
        if utterances.is_empty() || utterances.iter().any(Vec::is_empty) {
            return Err(Error::invalid(
                "corpus needs at least one non-empty utterance",
            ));
        }
        Ok(Self {
            utterances,
            sample_rate_hz,
            id: id.into(),
        })
    }

    /// Every `*.wav` below `dir` (sorted by path). Multichannel files are
    /// averaged to mono.
    pub fn load_dir(dir: &Path, sample_rate_hz: u32) -> Result<Self> {
        let mut paths = Vec::new();
        for entry in WalkDir::new(dir).sort_by_file_name() {
            let entry = entry.map_err(|e| Error::Dataset(format!("{}: {e}", dir.display())))?;
            let p = entry.path();
            if entry.file_type().is_file()
                && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"))
            {
                paths.push(p.to_path_buf());
            }
        }
        if paths.is_empty() {
            return Err(Error::Dataset(format!(
                "no WAV files under {}",
                dir.display()
            )));
        }
        let mut utterances = Vec::with_capacity(paths.len());
        let mut digest = String::new();
        for p in &paths {
            let audio = read_wav(p)?;
            if audio.sample_rate_hz() != sample_rate_hz {
                return Err(Error::RateMismatch {
                    path: p.clone(),
                    expected: sample_rate_hz,
                    found: audio.sample_rate_hz(),
                });
            }
            if audio.is_empty() {
                continue;
            }
            let n = audio.n_channels() as f64;
            let mono: Vec<f64> = (0..audio.n_samples())
                .map(|i| audio.channels().iter().map(|c| c[i]).sum::<f64>() / n)
                .collect();
            digest.push_str(&p.strip_prefix(dir).unwrap_or(p).to_string_lossy());
            digest.push_str(&audio.n_samples().to_string());
            utterances.push(mono);
        }
        Self::new(
            utterances,
            sample_rate_hz,
            format!("dir:{}", sha256_hex(digest.as_bytes())),
        )
    }

    /// Speech-like test material: voiced harmonic tones with a wandering
    /// pitch and syllable-rate amplitude modulation, plus light aspiration
    /// noise.
    pub fn synthetic(
        n_utterances: usize,
        duration_s: f64,
        sample_rate_hz: u32,
        seed: u64,
    ) -> Result<Self> {
        if n_utterances == 0 || !(duration_s > 0.0) {
            return Err(Error::invalid(
                "synthetic corpus needs utterances and a positive duration",
            ));
        }
        let mut r = rng(seed);
        let fs = f64::from(sample_rate_hz);
        let n = (duration_s * fs).round() as usize;
        let utterances = (0..n_utterances)
            .map(|_| {
                let f0 = r.random_range(95.0..230.0);
                let vib_rate = r.random_range(2.0..5.0);
                let vib_depth = r.random_range(0.03..0.1);
                let syl_rate = r.random_range(3.0..6.0);
                let syl_phase = r.random_range(0.0..2.0 * PI);
                let n_harm = ((4000.0 / f0) as usize).max(1);
                let harm_phase: Vec<f64> =
                    (0..n_harm).map(|_| r.random_range(0.0..2.0 * PI)).collect();
                let mut phase = 0.0;
                (0..n)
                    .map(|i| {
                        let t = i as f64 / fs;
                        let f = f0 * (1.0 + vib_depth * (2.0 * PI * vib_rate * t).sin());
                        phase += 2.0 * PI * f / fs;
                        let voiced: f64 = harm_phase
                            .iter()
                            .enumerate()
                            .map(|(k, p)| ((k + 1) as f64 * phase + p).sin() / (k + 1) as f64)
                            .sum();
                        let env = 0.65 + 0.35 * (2.0 * PI * syl_rate * t + syl_phase).sin();
                        let breath: f64 = r.random_range(-1.0..1.0);
                        0.3 * env * (voiced + 0.05 * breath)
                    })
                    .collect()
            })
            .collect();
        Self::new(
            utterances,
            sample_rate_hz,
            format!("synthetic:{n_utterances}:{duration_s}:{seed}"),
        )
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    /// Identifies the corpus contents for config hashing.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn utterance(&self, i: usize) -> &[f64] {
        &self.utterances[i]
    }

    /// `len` samples from a random utterance at a random offset, looping the
    /// utterance when it is shorter than requested.
    pub fn excerpt<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<f64> {
        let u = &self.utterances[rng.random_range(0..self.utterances.len())];
        let start = if u.len() > len {
            rng.random_range(0..=u.len() - len)
        } else {
            0
        };
        (0..len).map(|i| u[(start + i) % u.len()]).collect()
    }
}
