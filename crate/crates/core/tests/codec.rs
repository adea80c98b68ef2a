use binaural_doa::codec::{
    apply_topology, codec_roundtrip, segmental_snr_db, CodecConfig, CodecKind, ExternalCodecConfig,
    ReferenceCodec, Topology, CODEC_BIN_ENV,
};
use binaural_doa::dsp::MultichannelAudio;
use binaural_doa::scenegen::SpeechCorpus;
use binaural_doa::Error;

const FS: u32 = 16000;

fn speech(seed: u64) -> Vec<f64> {
    SpeechCorpus::synthetic(1, 2.0, FS, seed)
        .unwrap()
        .utterance(0)
        .to_vec()
}

fn six(seed: u64) -> MultichannelAudio {
    MultichannelAudio::new((0..6).map(|c| speech(seed * 10 + c)).collect(), FS).unwrap()
}

fn global_snr_db(x: &[f64], y: &[f64]) -> f64 {
    let s: f64 = x.iter().map(|v| v * v).sum();
    let e: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    10.0 * (s / e).log10()
}

#[test]
fn identity_is_bit_exact() {
    let x = speech(1);
    assert_eq!(
        codec_roundtrip(&x, FS, &CodecConfig::identity()).unwrap(),
        x
    );
    let a = six(1);
    assert_eq!(
        apply_topology(&a, Topology::None, &CodecConfig::reference(16_000)).unwrap(),
        a
    );
}

#[test]
fn encode3_keeps_the_processing_side() {
    let a = six(2);
    let cfg = CodecConfig::reference(32_000);
    for (name, kept, coded) in [
        ("encode-3-right", 3..6, 0..3),
        ("encode-3-left", 0..3, 3..6),
    ] {
        let out = apply_topology(&a, name.parse().unwrap(), &cfg).unwrap();
        for c in kept {
            assert_eq!(out.channel(c), a.channel(c), "{name} channel {c}");
        }
        for c in coded {
            assert_ne!(out.channel(c), a.channel(c), "{name} channel {c}");
        }
    }
}

#[test]
fn topologies_commute_with_per_channel_coding() {
    let a = six(3);
    let cfg = CodecConfig::reference(16_000);
    let all = apply_topology(&a, Topology::Encode6, &cfg).unwrap();
    let three = apply_topology(&a, "encode-3".parse().unwrap(), &cfg).unwrap();
    for c in 0..6 {
        let single = codec_roundtrip(a.channel(c), FS, &cfg).unwrap();
        assert_eq!(all.channel(c), &single[..]);
        if c < 3 {
            assert_eq!(three.channel(c), all.channel(c));
        }
    }
}

#[test]
fn quality_does_not_rise_as_bitrate_falls() {
    for seed in [11, 12, 13] {
        let x = speech(seed);
        let q: Vec<f64> = [64_000, 32_000, 16_000]
            .iter()
            .map(|&b| {
                let y = codec_roundtrip(&x, FS, &CodecConfig::reference(b)).unwrap();
                segmental_snr_db(&x, &y, 160).unwrap()
            })
            .collect();
        assert!(q[0] >= q[1] && q[1] >= q[2], "seed {seed}: {q:?}");
        assert!(q[0] > 15.0, "seed {seed}: {q:?}");
    }
}

#[test]
fn full_scale_tone_fixture() {
    let x: Vec<f64> = (0..FS as usize)
        .map(|n| (2.0 * std::f64::consts::PI * 1000.0 * n as f64 / f64::from(FS)).sin())
        .collect();
    let y = codec_roundtrip(&x, FS, &CodecConfig::reference(64_000)).unwrap();
    let snr = global_snr_db(&x, &y);
    assert!((snr - 35.50).abs() < 0.01, "{snr}");
}

#[test]
fn output_is_time_aligned() {
    let x = speech(4);
    let y = codec_roundtrip(&x, FS, &CodecConfig::reference(32_000)).unwrap();
    assert_eq!(y.len(), x.len());
    let xcorr = |lag: i64| -> f64 {
        (0..x.len() as i64)
            .filter_map(|n| {
                let m = n + lag;
                (0..x.len() as i64)
                    .contains(&m)
                    .then(|| x[n as usize] * y[m as usize])
            })
            .sum()
    };
    let best = (-200..=200)
        .max_by(|&a, &b| xcorr(a).total_cmp(&xcorr(b)))
        .unwrap();
    assert_eq!(best, 0);
}

#[test]
fn bitstream_meets_the_budget() {
    for b in [16_000, 32_000, 64_000] {
        let codec = ReferenceCodec::new(b, FS).unwrap();
        let s = codec.encode(&speech(5));
        let rate = s.bits.len() as f64 / (s.n_samples as f64 / f64::from(FS));
        assert!((rate / f64::from(b) - 1.0).abs() <= 0.02, "{b}: {rate}");
    }
}

#[test]
fn unsupported_rates_are_errors() {
    assert!(codec_roundtrip(&speech(1), 48_000, &CodecConfig::reference(32_000)).is_err());
    assert!(CodecConfig::reference(1_000).validate().is_err());
}

fn external(encode: &str, decode: &str, delay: usize) -> CodecConfig {
    CodecConfig {
        kind: CodecKind::External,
        external: Some(ExternalCodecConfig {
            encode: encode.into(),
            decode: decode.into(),
            binary: None,
        }),
        algorithmic_delay_samples: delay,
        ..CodecConfig::default()
    }
}

#[test]
fn external_bridge_round_trip_and_delay() {
    let x: Vec<f64> = speech(6).iter().map(|v| v * 0.5).collect();
    let y = codec_roundtrip(&x, FS, &external("cp {in} {out}", "cp {in} {out}", 0)).unwrap();
    assert!(x
        .iter()
        .zip(&y)
        .all(|(a, b)| (a - b).abs() <= 1.0 / 32768.0));
    let d = codec_roundtrip(&x, FS, &external("cp {in} {out}", "cp {in} {out}", 10)).unwrap();
    assert_eq!(d.len(), x.len());
    assert_eq!(&d[..x.len() - 10], &y[10..]);
    assert!(d[x.len() - 10..].iter().all(|v| *v == 0.0));
}

#[test]
fn external_failure_carries_stderr() {
    let err = codec_roundtrip(
        &speech(1),
        FS,
        &external("echo broken >&2; exit 3", "cp {in} {out}", 0),
    )
    .unwrap_err();
    match err {
        Error::ExternalCodec { status, stderr, .. } => {
            assert_eq!(status, Some(3));
            assert_eq!(stderr, "broken");
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn binary_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("fake codec");
    std::fs::write(&script, "#!/bin/sh\ncp \"$2\" \"$3\"\n").unwrap();
    std::process::Command::new("chmod")
        .arg("+x")
        .arg(&script)
        .status()
        .unwrap();
    std::env::set_var(CODEC_BIN_ENV, &script);
    let x = vec![0.25; 1600];
    let y = codec_roundtrip(
        &x,
        FS,
        &external("{bin} enc {in} {out}", "{bin} dec {in} {out}", 0),
    )
    .unwrap();
    std::env::remove_var(CODEC_BIN_ENV);
    assert!(x
        .iter()
        .zip(&y)
        .all(|(a, b)| (a - b).abs() <= 1.0 / 32768.0));
}
