//! WAV reading and writing. Reads 16-bit PCM (and other integer depths) and
//! IEEE float-32; writes either float-32 or 16-bit PCM.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::MultichannelAudio;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Float32,
    Pcm16,
}

fn wav_err(path: &Path) -> impl FnOnce(hound::Error) -> Error + '_ {
    move |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_wav(path: &Path) -> Result<MultichannelAudio> {
    let reader = WavReader::open(path).map_err(wav_err(path))?;
    let spec = reader.spec();
    let n_ch = usize::from(spec.channels);
    let interleaved: Vec<f64> = match spec.sample_format {
        SampleFormat::Float => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err(path))?,
        SampleFormat::Int => {
            let scale = 1.0 / f64::from(1u32 << (spec.bits_per_sample - 1));
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err(path))?
        }
    };
    let n = interleaved.len() / n_ch.max(1);
    let mut channels = vec![Vec::with_capacity(n); n_ch];
    for frame in interleaved.chunks_exact(n_ch) {
        for (c, &x) in channels.iter_mut().zip(frame) {
            c.push(x);
        }
    }
    MultichannelAudio::new(channels, spec.sample_rate)
}

pub fn write_wav(path: &Path, audio: &MultichannelAudio, encoding: WavEncoding) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let channels = u16::try_from(audio.n_channels())
        .map_err(|_| Error::invalid("too many channels for WAV"))?;
    let spec = match encoding {
        WavEncoding::Float32 => WavSpec {
            channels,
            sample_rate: audio.sample_rate_hz(),
            bits_per_sample: 32,
            sample_format: SampleFormat::Float,
        },
        WavEncoding::Pcm16 => WavSpec {
            channels,
            sample_rate: audio.sample_rate_hz(),
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        },
    };
    let tmp = path.with_extension("wav.partial");
    let mut writer = WavWriter::create(&tmp, spec).map_err(wav_err(&tmp))?;
    for i in 0..audio.n_samples() {
        for c in audio.channels() {
            match encoding {
                WavEncoding::Float32 => writer.write_sample(c[i] as f32),
                WavEncoding::Pcm16 => {
                    let v = (c[i] * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    writer.write_sample(v)
                }
            }
            .map_err(wav_err(&tmp))?;
        }
    }
    writer.finalize().map_err(wav_err(&tmp))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
