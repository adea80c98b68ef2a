use bitvec::prelude::*;

use super::mdct::Mdct;
use crate::{Error, Result};

/// Band widths in MDCT bins (50 Hz each at 16 kHz), 17 bands over 0-8 kHz.
const BAND_WIDTHS: [usize; 17] = [4, 4, 4, 4, 4, 4, 6, 6, 8, 8, 10, 10, 12, 14, 16, 20, 26];
const FRAME: usize = 160;
/// Scale-factor exponents `e` in `[-SF_OFFSET, 31 - SF_OFFSET]`.
const SF_OFFSET: i32 = 23;
const SF_BITS: usize = 5;
const ALLOC_BITS: usize = 3;
const MIN_BITS: u32 = 2;
const MAX_BITS: u32 = 8;

/// Fixed-rate frames of a [`ReferenceCodec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedStream {
    pub bits: BitVec<u8, Msb0>,
    pub n_frames: usize,
    pub bits_per_frame: usize,
    pub n_samples: usize,
}

/// Open transform codec for 16 kHz mono: 10 ms MDCT frames, 17 bands with a
/// 5-bit scale factor each, uniform mid-tread quantisers and greedy bit
/// allocation filling a constant per-frame budget.
///
/// Per band the frame carries an "active" bit; active bands add a 3-bit
/// resolution code (2..=8 bits per coefficient), the scale factor and the
/// coefficients. Frames are zero-padded to exactly the budget.
#[derive(Debug, Clone)]
pub struct ReferenceCodec {
    bitrate_bps: u32,
    bits_per_frame: usize,
    mdct: Mdct,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct BandCode {
    bits: u32,
    exponent: i32,
}

impl ReferenceCodec {
    pub const SAMPLE_RATE_HZ: u32 = 16_000;
    /// Delay introduced by the overlap, compensated inside [`Self::roundtrip`].
    pub const DELAY_SAMPLES: usize = FRAME;

    pub fn new(bitrate_bps: u32, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz != Self::SAMPLE_RATE_HZ {
            return Err(Error::Codec(format!(
                "reference codec runs at 16000 Hz, got {sample_rate_hz}"
            )));
        }
        let bits_per_frame = (bitrate_bps / 100) as usize;
        if bits_per_frame < BAND_WIDTHS.len() {
            return Err(Error::Codec(format!(
                "{bitrate_bps} bit/s leaves {bits_per_frame} bits per frame, below one bit per band"
            )));
        }
        Ok(Self {
            bitrate_bps,
            bits_per_frame,
            mdct: Mdct::new(FRAME),
        })
    }

    pub fn bitrate_bps(&self) -> u32 {
        self.bitrate_bps
    }

    pub fn bits_per_frame(&self) -> usize {
        self.bits_per_frame
    }

    pub fn encode(&self, samples: &[f64]) -> EncodedStream {
        let n_frames = samples.len().div_ceil(FRAME) + 1;
        let mut padded = vec![0.0; (n_frames + 1) * FRAME];
        padded[FRAME..FRAME + samples.len()].copy_from_slice(samples);
        let mut bits = BitVec::with_capacity(n_frames * self.bits_per_frame);
        let mut coeffs = vec![0.0; FRAME];
        for f in 0..n_frames {
            self.mdct
                .forward(&padded[f * FRAME..f * FRAME + 2 * FRAME], &mut coeffs);
            let start = bits.len();
            self.encode_frame(&coeffs, &mut bits);
            debug_assert!(bits.len() - start <= self.bits_per_frame);
            bits.resize(start + self.bits_per_frame, false);
        }
        EncodedStream {
            bits,
            n_frames,
            bits_per_frame: self.bits_per_frame,
            n_samples: samples.len(),
        }
    }

    pub fn decode(&self, stream: &EncodedStream) -> Result<Vec<f64>> {
        if stream.bits_per_frame != self.bits_per_frame
            || stream.bits.len() != stream.n_frames * stream.bits_per_frame
            || stream.n_frames != stream.n_samples.div_ceil(FRAME) + 1
        {
            return Err(Error::Codec(
                "bitstream does not match codec configuration".into(),
            ));
        }
        let mut out = vec![0.0; (stream.n_frames + 1) * FRAME];
        let mut coeffs = vec![0.0; FRAME];
        let mut block = vec![0.0; 2 * FRAME];
        for f in 0..stream.n_frames {
            let frame = &stream.bits[f * self.bits_per_frame..(f + 1) * self.bits_per_frame];
            decode_frame(frame, &mut coeffs)?;
            self.mdct.inverse(&coeffs, &mut block);
            for (o, b) in out[f * FRAME..].iter_mut().zip(&block) {
                *o += b;
            }
        }
        Ok(out[FRAME..FRAME + stream.n_samples].to_vec())
    }

    /// Encode and decode; the output is time-aligned with the input.
    pub fn roundtrip(&self, samples: &[f64]) -> Result<Vec<f64>> {
        debug_assert_eq!(self.mdct.hop(), FRAME);
        self.decode(&self.encode(samples))
    }

    fn encode_frame(&self, coeffs: &[f64], bits: &mut BitVec<u8, Msb0>) {
        let bands: Vec<&[f64]> = band_slices(coeffs);
        let mut codes = [BandCode::default(); 17];
        let mut exps = [None; 17];
        for (j, band) in bands.iter().enumerate() {
            exps[j] = band_exponent(band);
        }
        let mut dist: Vec<f64> = bands
            .iter()
            .map(|b| b.iter().map(|x| x * x).sum())
            .collect();
        let mut used = BAND_WIDTHS.len();
        loop {
            let mut best: Option<(usize, u32, f64, usize, f64)> = None;
            for (j, band) in bands.iter().enumerate() {
                let Some(e) = exps[j] else { continue };
                let b = codes[j].bits;
                let (next, cost) = match b {
                    0 => (
                        MIN_BITS,
                        ALLOC_BITS + SF_BITS + MIN_BITS as usize * band.len(),
                    ),
                    MAX_BITS => continue,
                    _ => (b + 1, band.len()),
                };
                if used + cost > self.bits_per_frame {
                    continue;
                }
                let d = quantised_error(band, next, e);
                let gain = (dist[j] - d) / cost as f64;
                if gain > 0.0 && best.is_none_or(|(_, _, g, _, _)| gain > g) {
                    best = Some((j, next, gain, cost, d));
                }
            }
            let Some((j, next, _, cost, d)) = best else {
                break;
            };
            codes[j] = BandCode {
                bits: next,
                exponent: exps[j].expect("checked"),
            };
            dist[j] = d;
            used += cost;
        }
        for (band, code) in bands.iter().zip(&codes) {
            if code.bits == 0 {
                bits.push(false);
                continue;
            }
            bits.push(true);
            push_uint(bits, u64::from(code.bits - MIN_BITS), ALLOC_BITS);
            push_uint(bits, (code.exponent + SF_OFFSET) as u64, SF_BITS);
            let (step, half) = quantiser(code.bits, code.exponent);
            for &x in band.iter() {
                let q = (x / step).round().clamp(-half, half);
                push_uint(bits, (q + half) as u64, code.bits as usize);
            }
        }
    }
}

fn band_slices(coeffs: &[f64]) -> Vec<&[f64]> {
    let mut out = Vec::with_capacity(BAND_WIDTHS.len());
    let mut start = 0;
    for w in BAND_WIDTHS {
        out.push(&coeffs[start..start + w]);
        start += w;
    }
    out
}

/// `ceil(log2(max |x|))` within the scale-factor range, or `None` for a band
/// too quiet to code.
fn band_exponent(band: &[f64]) -> Option<i32> {
    let peak = band.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak <= 0.0 {
        return None;
    }
    let e = peak.log2().ceil() as i32;
    if e < -SF_OFFSET {
        None
    } else {
        Some(e.min((1 << SF_BITS) - 1 - SF_OFFSET))
    }
}

/// Step size and largest index of the `2^bits - 1` level quantiser spanning
/// `[-2^e, 2^e]`.
fn quantiser(bits: u32, exponent: i32) -> (f64, f64) {
    let half = f64::from((1u32 << (bits - 1)) - 1);
    (2f64.powi(exponent) / half, half)
}

fn quantised_error(band: &[f64], bits: u32, exponent: i32) -> f64 {
    let (step, half) = quantiser(bits, exponent);
    band.iter()
        .map(|&x| {
            let r = (x / step).round().clamp(-half, half) * step;
            (x - r) * (x - r)
        })
        .sum()
}

fn push_uint(bits: &mut BitVec<u8, Msb0>, value: u64, width: usize) {
    for i in (0..width).rev() {
        bits.push((value >> i) & 1 == 1);
    }
}

struct Reader<'a> {
    bits: &'a BitSlice<u8, Msb0>,
    pos: usize,
}

impl Reader<'_> {
    fn read(&mut self, width: usize) -> Result<u64> {
        let end = self.pos + width;
        if end > self.bits.len() {
            return Err(Error::Codec("frame overrun while decoding".into()));
        }
        let v = self.bits[self.pos..end]
            .iter()
            .fold(0u64, |acc, b| (acc << 1) | u64::from(*b));
        self.pos = end;
        Ok(v)
    }
}

fn decode_frame(frame: &BitSlice<u8, Msb0>, coeffs: &mut [f64]) -> Result<()> {
    let mut r = Reader {
        bits: frame,
        pos: 0,
    };
    let mut start = 0;
    for w in BAND_WIDTHS {
        let out = &mut coeffs[start..start + w];
        start += w;
        if r.read(1)? == 0 {
            out.fill(0.0);
            continue;
        }
        let bits = r.read(ALLOC_BITS)? as u32 + MIN_BITS;
        if bits > MAX_BITS {
            return Err(Error::Codec(format!("invalid allocation {bits}")));
        }
        let exponent = r.read(SF_BITS)? as i32 - SF_OFFSET;
        let (step, half) = quantiser(bits, exponent);
        for o in out.iter_mut() {
            *o = (r.read(bits as usize)? as f64 - half) * step;
        }
    }
    Ok(())
}
