use std::path::Path;
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::dsp::wav::{read_wav, write_wav, WavEncoding};
use crate::dsp::MultichannelAudio;
use crate::{Error, Result};

/// Environment variable overriding [`ExternalCodecConfig::binary`].
pub const CODEC_BIN_ENV: &str = "BINAURAL_DOA_CODEC_BIN";

/// File-based bridge to a command-line codec. Templates run through `sh -c`
/// with `{in}`, `{out}`, `{bitrate}`, `{fs}` and `{bin}` substituted; the
/// encoder reads a 16-bit mono WAV, the decoder must write one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalCodecConfig {
    pub encode: String,
    pub decode: String,
    #[serde(default)]
    pub binary: Option<String>,
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

fn render(template: &str, input: &Path, output: &Path, bitrate: u32, fs: u32, bin: &str) -> String {
    template
        .replace("{in}", &shell_quote(&input.to_string_lossy()))
        .replace("{out}", &shell_quote(&output.to_string_lossy()))
        .replace("{bitrate}", &bitrate.to_string())
        .replace("{fs}", &fs.to_string())
        .replace("{bin}", &shell_quote(bin))
}

fn run(command: &str) -> Result<()> {
    let out = Command::new("sh")
        .arg("-c")
        .arg(command)
        .output()
        .map_err(|e| Error::ExternalCodec {
            command: command.to_string(),
            status: None,
            stderr: e.to_string(),
        })?;
    if !out.status.success() {
        return Err(Error::ExternalCodec {
            command: command.to_string(),
            status: out.status.code(),
            stderr: String::from_utf8_lossy(&out.stderr).trim().to_string(),
        });
    }
    Ok(())
}

/// One encode/decode cycle in a private temporary directory. The first
/// `delay` output samples are dropped and the result is cut or zero-padded to
/// the input length.
pub(crate) fn external_roundtrip(
    samples: &[f64],
    sample_rate_hz: u32,
    bitrate_bps: u32,
    delay: usize,
    config: &ExternalCodecConfig,
) -> Result<Vec<f64>> {
    let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let wav_in = dir.path().join("in.wav");
    let stream = dir.path().join("stream.bin");
    let wav_out = dir.path().join("out.wav");
    let bin = std::env::var(CODEC_BIN_ENV)
        .ok()
        .or_else(|| config.binary.clone())
        .unwrap_or_default();
    write_wav(
        &wav_in,
        &MultichannelAudio::mono(samples.to_vec(), sample_rate_hz)?,
        WavEncoding::Pcm16,
    )?;
    run(&render(
        &config.encode,
        &wav_in,
        &stream,
        bitrate_bps,
        sample_rate_hz,
        &bin,
    ))?;
    run(&render(
        &config.decode,
        &stream,
        &wav_out,
        bitrate_bps,
        sample_rate_hz,
        &bin,
    ))?;
    let decoded = read_wav(&wav_out)?;
    if decoded.sample_rate_hz() != sample_rate_hz {
        return Err(Error::RateMismatch {
            path: wav_out,
            expected: sample_rate_hz,
            found: decoded.sample_rate_hz(),
        });
    }
    if decoded.n_channels() != 1 {
        return Err(Error::ChannelMismatch {
            path: wav_out,
            expected: 1,
            found: decoded.n_channels(),
        });
    }
    let ch = decoded.channel(0);
    let mut out: Vec<f64> = ch.iter().skip(delay).take(samples.len()).copied().collect();
    out.resize(samples.len(), 0.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting_survives_spaces_and_quotes() {
        let s = render(
            "x {in} {out} {bitrate} {fs} {bin}",
            Path::new("/a b/it's"),
            Path::new("/o"),
            32000,
            16000,
            "",
        );
        assert_eq!(s, r"x '/a b/it'\''s' '/o' 32000 16000 ''");
    }

    #[test]
    fn copy_codec_round_trips_within_pcm16_precision() {
        let cfg = ExternalCodecConfig {
            encode: "cp {in} {out}".into(),
            decode: "cp {in} {out}".into(),
            binary: None,
        };
        let x: Vec<f64> = (0..500).map(|i| (i as f64 * 0.1).sin() * 0.5).collect();
        let y = external_roundtrip(&x, 16000, 32000, 0, &cfg).unwrap();
        assert_eq!(y.len(), x.len());
        assert!(x
            .iter()
            .zip(&y)
            .all(|(a, b)| (a - b).abs() <= 1.0 / 32768.0));
        // delay compensation drops leading samples and pads the tail
        let y = external_roundtrip(&x, 16000, 32000, 3, &cfg).unwrap();
        assert!((y[0] - x[3]).abs() <= 1.0 / 32768.0);
        assert_eq!(y[499], 0.0);
    }

    #[test]
    fn failure_reports_stderr() {
        let cfg = ExternalCodecConfig {
            encode: "echo broken codec >&2; exit 3".into(),
            decode: "true".into(),
            binary: None,
        };
        match external_roundtrip(&[0.0; 10], 16000, 32000, 0, &cfg) {
            Err(Error::ExternalCodec { status, stderr, .. }) => {
                assert_eq!(status, Some(3));
                assert_eq!(stderr, "broken codec");
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
