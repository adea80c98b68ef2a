//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use binaural_doa::acoustics::{
    render_brir, AbsorptionModel, ArrayPose, BrirConfig, DiffuseNoiseGenerator, Room, RoomSpec,
};
use binaural_doa::codec::{
    apply_topology, codec_roundtrip, segmental_snr_db, CodecConfig, Topology,
};
use binaural_doa::doa::{
    accuracy_counts, decode_topk_per_frame, srp_phat_with, DoaGrid, SteeringVectors,
};
use binaural_doa::dsp::{stft, MultichannelAudio, StftConfig};
use binaural_doa::features::extract_features;
use binaural_doa::scenegen::{sample_activity, ActivityParams, DatasetManifest, SpeechCorpus};
use binaural_doa::spatial::{
    fibonacci_sphere, horizontal_grid, synth_free_field, BteArrayGeometry,
};
use common::{anechoic_segment, head_hrirs, l2, msc, peak_index, schroeder_t30};
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn a1() -> Outcome {
    let room = Room::anechoic("free", [12.0, 12.0, 3.0]);
    let pose = ArrayPose {
        head_center_m: [3.0, 6.0, 1.5],
        yaw_deg: 0.0,
    };
    // every microphone at the head centre: the BRIR is the propagation alone
    let hrirs = synth_free_field(&horizontal_grid(5.0), &[[0.0; 3]; 6], 0.0, 8, 16000)
        .map_err(|e| e.to_string())?;
    let at = |d: f64| {
        render_brir(
            &room,
            [3.0 + d, 6.0, 1.5],
            &pose,
            &hrirs,
            &BrirConfig::default(),
        )
    };
    let (one, two) = (
        at(1.0).map_err(|e| e.to_string())?,
        at(2.0).map_err(|e| e.to_string())?,
    );
    let expected = (16000.0f64 / 343.0).round() as i64;
    let mut worst_peak = 0;
    let mut worst_ratio: f64 = 0.0;
    for c in 0..6 {
        worst_peak = worst_peak.max((peak_index(one.ir.channel(c)) as i64 - expected).abs());
        let r = l2(two.ir.channel(c)) / l2(one.ir.channel(c));
        worst_ratio = worst_ratio.max((r / 0.5 - 1.0).abs());
    }
    check(
        worst_peak <= 1 && worst_ratio <= 0.05,
        format!("peak offset {worst_peak} samples from {expected}, 2 m / 1 m amplitude off 0.5 by {:.2}%", 100.0 * worst_ratio),
    )
}

fn a2() -> Outcome {
    let spec = RoomSpec::new("R14", [5.0, 4.0, 2.5], 0.2);
    let room = Room::from_spec(&spec, AbsorptionModel::Sabine).map_err(|e| e.to_string())?;
    let hrirs = synth_free_field(&horizontal_grid(5.0), &[[0.0; 3]], 0.0, 8, 16000)
        .map_err(|e| e.to_string())?;
    let poses = [
        ([2.2, 1.7, 1.3], [3.6, 2.9, 1.3]),
        ([1.5, 2.5, 1.6], [3.8, 1.2, 1.6]),
    ];
    let mut ts = Vec::new();
    for (head, src) in poses {
        let pose = ArrayPose {
            head_center_m: head,
            yaw_deg: 0.0,
        };
        let b = render_brir(&room, src, &pose, &hrirs, &BrirConfig::default())
            .map_err(|e| e.to_string())?;
        ts.push(schroeder_t30(b.ir.channel(0), 16000.0));
    }
    check(
        ts.iter().all(|t| (0.16..=0.24).contains(t)),
        format!(
            "-60 dB reached at {:.3} s and {:.3} s (target 0.2 s +/- 20%)",
            ts[0], ts[1]
        ),
    )
}

fn a3() -> Outcome {
    let cfg = StftConfig::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let (mut unit, mut mean_dev, mut exact, mut other) = (0.0f64, 0.0f64, true, 0.0f64);
    for _ in 0..100 {
        let ch: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..32_000).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let a = MultichannelAudio::new(ch, 16000).map_err(|e| e.to_string())?;
        let f = extract_features(&stft(&a, &cfg).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        for m in 0..f.n_frames() {
            for k in 0..cfg.n_bins() {
                let mut mean = 0.0f64;
                for c in 0..6 {
                    let (s, co) = (f64::from(f.get(m, 0, c, k)), f64::from(f.get(m, 1, c, k)));
                    unit = unit.max((s * s + co * co - 1.0).abs());
                    mean += f64::from(f.get(m, 2, c, k)) / 6.0;
                }
                mean_dev = mean_dev.max((mean - 1.0).abs());
            }
        }
        let scale = |g: f64| {
            let ch = a
                .channels()
                .iter()
                .map(|c| c.iter().map(|x| x * g).collect())
                .collect();
            let s = MultichannelAudio::new(ch, 16000).unwrap();
            extract_features(&stft(&s, &cfg).unwrap()).unwrap()
        };
        let e: i32 = rng.random_range(-12..12);
        exact &= scale(2f64.powi(e)) == f;
        let g = rng.random_range(0.01..100.0);
        let h = scale(g);
        other = other.max(
            f.as_slice()
                .iter()
                .zip(h.as_slice())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f32::max)
                .into(),
        );
    }
    check(
        unit <= 1e-6 && mean_dev <= 1e-6 && exact,
        format!(
            "max |sin^2+cos^2-1| {unit:.1e}, max |mean magnitude-1| {mean_dev:.1e}, 2^k gains bit-exact: {exact}, other gains within {other:.1e}"
        ),
    )
}

fn a4() -> Outcome {
    let p = ActivityParams::default();
    let (mut exposure, mut changes) = (0.0, 0usize);
    for seed in 0..10_000 {
        let t = sample_activity(&p, 72, seed).map_err(|e| e.to_string())?;
        exposure += p.segment_s * p.max_sources as f64;
        changes += t.transitions();
    }
    let dwell = exposure / changes as f64;
    check(
        (1.35..=1.65).contains(&dwell),
        format!("mean dwell {dwell:.3} s from {changes} transitions"),
    )
}

fn a5() -> Outcome {
    let positions = BteArrayGeometry::default().positions();
    let hrirs = synth_free_field(&fibonacci_sphere(256), &positions, 30.0, 64, 16000)
        .map_err(|e| e.to_string())?;
    let gen = DiffuseNoiseGenerator::new(&hrirs, 16000).map_err(|e| e.to_string())?;
    let mut ch = vec![Vec::new(); positions.len()];
    for seed in 0..10 {
        let a = gen.generate(seed);
        for (c, out) in ch.iter_mut().enumerate() {
            out.extend_from_slice(a.channel(c));
        }
    }
    let n = 512;
    let mut worst: f64 = 0.0;
    for i in 0..positions.len() {
        for j in i + 1..positions.len() {
            let d = (0..3)
                .map(|a| (positions[i][a] - positions[j][a]).powi(2))
                .sum::<f64>()
                .sqrt();
            let m = msc(&ch[i], &ch[j], n);
            for (k, v) in m.iter().enumerate().skip(1) {
                let f = k as f64 * 16000.0 / n as f64;
                if f >= 4000.0 {
                    break;
                }
                let x = 2.0 * std::f64::consts::PI * f * d / 343.0;
                worst = worst.max((v - (x.sin() / x).powi(2)).abs());
            }
        }
    }
    check(
        worst <= 0.15,
        format!("max deviation {worst:.3} from sinc^2(kd) over 15 pairs, 10 s, below 4 kHz"),
    )
}

fn a6() -> Outcome {
    let hrirs = head_hrirs();
    let grid = DoaGrid::default();
    let steering = SteeringVectors::new(&hrirs, &grid, 512, 16000).map_err(|e| e.to_string())?;
    let corpus = SpeechCorpus::synthetic(36, 2.5, 16000, 6).map_err(|e| e.to_string())?;
    let noise = DiffuseNoiseGenerator::new(&hrirs, 32_000).map_err(|e| e.to_string())?;
    let (mut correct, mut total) = (0, 0);
    for i in 0..36 {
        let (audio, labels) = anechoic_segment(&hrirs, &corpus, &noise, 10.0 * i as f64, i as u64);
        let spec = stft(&audio, &StftConfig::default()).map_err(|e| e.to_string())?;
        let scores = srp_phat_with(&spec, &steering, &grid).map_err(|e| e.to_string())?;
        let counts: Vec<usize> = (0..labels.n_frames())
            .map(|m| labels.active(m).len())
            .collect();
        let est = decode_topk_per_frame(&scores, &counts).map_err(|e| e.to_string())?;
        let (c, n) = accuracy_counts(&grid, &est, &labels, 1).map_err(|e| e.to_string())?;
        correct += c;
        total += n;
    }
    let acc = 100.0 * correct as f64 / total as f64;
    check(
        acc >= 90.0,
        format!("{acc:.2}% of {total} frames within one sector, 36 azimuths"),
    )
}

fn a7() -> Outcome {
    let x = |seed: u64| {
        SpeechCorpus::synthetic(1, 2.0, 16000, seed)
            .unwrap()
            .utterance(0)
            .to_vec()
    };
    let a = MultichannelAudio::new((0..6).map(|c| x(100 + c)).collect(), 16000)
        .map_err(|e| e.to_string())?;
    let id_none = apply_topology(&a, Topology::None, &CodecConfig::reference(16_000))
        .map_err(|e| e.to_string())?
        == a;
    let id_codec = apply_topology(&a, Topology::Encode6, &CodecConfig::identity())
        .map_err(|e| e.to_string())?
        == a;
    let mut kept = true;
    for (name, side) in [("encode-3-right", 3..6), ("encode-3-left", 0..3)] {
        let t: Topology = name
            .parse()
            .map_err(|e: binaural_doa::Error| e.to_string())?;
        let out =
            apply_topology(&a, t, &CodecConfig::reference(32_000)).map_err(|e| e.to_string())?;
        kept &= side.into_iter().all(|c| out.channel(c) == a.channel(c));
    }
    let mut monotone = true;
    let mut table = Vec::new();
    for seed in [11, 12, 13] {
        let s = x(seed);
        let q: Vec<f64> = [64_000, 32_000, 16_000]
            .iter()
            .map(|&b| {
                segmental_snr_db(
                    &s,
                    &codec_roundtrip(&s, 16000, &CodecConfig::reference(b)).unwrap(),
                    160,
                )
                .unwrap()
            })
            .collect();
        monotone &= q[0] >= q[1] && q[1] >= q[2];
        table.push(format!("{:.1}/{:.1}/{:.1}", q[0], q[1], q[2]));
    }
    check(
        id_none && id_codec && kept && monotone,
        format!(
            "identity exact: {}, processing ear exact: {kept}, segSNR 64/32/16 kbps dB: {}",
            id_none && id_codec,
            table.join(", ")
        ),
    )
}

fn a8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let bin = env!("CARGO_BIN_EXE_binaural-doa");
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.toml");
    let run = |args: &[String]| -> Result<(), String> {
        let out = Command::new(bin)
            .args(args)
            .env("RUST_LOG", "warn")
            .output()
            .map_err(|e| e.to_string())?;
        if out.status.success() {
            Ok(())
        } else {
            Err(String::from_utf8_lossy(&out.stderr).into_owned())
        }
    };
    let args = |cmd: &str, data: &str| {
        vec![
            cmd.to_string(),
            "-c".into(),
            config.display().to_string(),
            "--set".into(),
            format!("paths.bank_dir={}", root.join("bank").display()),
            "--set".into(),
            format!("paths.dataset_dir={}", root.join(data).display()),
        ]
    };
    run(&args("build-brirs", "a"))?;
    run(&args("gen-dataset", "a"))?;
    run(&args("gen-dataset", "b"))?;
    let (da, db) = (root.join("a"), root.join("b"));
    let bytes = |p: &Path| std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()));
    let mut same = bytes(&da.join("manifest.json"))? == bytes(&db.join("manifest.json"))?;
    let m = DatasetManifest::load(&da).map_err(|e| e.to_string())?;
    for s in &m.segments {
        same &= bytes(&da.join(&s.labels))? == bytes(&db.join(&s.labels))?;
        same &= bytes(&da.join(&s.mixture))? == bytes(&db.join(&s.mixture))?;
    }
    check(
        same,
        format!(
            "{} segments, manifests, labels and audio byte-identical: {same}",
            m.segments.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() {
    let criteria: [Criterion; 8] = [
        ("A1", a1, Some(Duration::from_secs(10))),
        ("A2", a2, Some(Duration::from_secs(60))),
        ("A3", a3, None),
        ("A4", a4, None),
        ("A5", a5, None),
        ("A6", a6, Some(Duration::from_secs(300))),
        ("A7", a7, None),
        ("A8", a8, None),
    ];
    let mut failed = 0;
    for (name, f, budget) in criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let took = t.elapsed();
        let over = budget.is_some_and(|b| took > b);
        let (pass, detail) = match outcome {
            Ok(d) if !over => (true, d),
            Ok(d) => (
                false,
                format!("{d}; over the {} s budget", budget.unwrap().as_secs()),
            ),
            Err(d) => (false, d),
        };
        failed += usize::from(!pass);
        println!(
            "{name} {} ({detail}; {:.2} s)",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
