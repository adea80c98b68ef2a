use std::f64::consts::PI;

use crate::{Error, Result};

/// Length of the Hann-windowed sinc interpolation kernel.
pub const FRACTIONAL_DELAY_TAPS: usize = 51;
const HALF: i64 = (FRACTIONAL_DELAY_TAPS as i64 - 1) / 2;

fn windowed_sinc(t: f64) -> f64 {
    // Hann window spanning |t| < HALF + 1 so every tap stays strictly inside.
    let width = (HALF + 1) as f64;
    if t.abs() >= width {
        return 0.0;
    }
    let w = 0.5 + 0.5 * (PI * t / width).cos();
    let s = if t == 0.0 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    };
    w * s
}

/// Kernel taps for a fractional offset in [-0.5, 0.5]; tap `j` applies to
/// offset `j - HALF`.
fn kernel(frac: f64) -> [f64; FRACTIONAL_DELAY_TAPS] {
    let mut taps = [0.0; FRACTIONAL_DELAY_TAPS];
    for (j, tap) in taps.iter_mut().enumerate() {
        *tap = windowed_sinc(j as f64 - HALF as f64 - frac);
    }
    taps
}

/// Adds `gain * src(t - delay)` into `dst`, sample-aligned so that
/// `dst[n] += gain * src[n - delay]`. Samples landing outside `dst` are dropped.
/// Integer delays are applied as exact shifts.
pub fn add_fractionally_delayed(dst: &mut [f64], src: &[f64], delay: f64, gain: f64) {
    let whole = delay.round();
    let frac = delay - whole;
    let whole = whole as i64;
    if frac == 0.0 {
        for (i, &x) in src.iter().enumerate() {
            let n = i as i64 + whole;
            if n >= 0 && (n as usize) < dst.len() {
                dst[n as usize] += gain * x;
            }
        }
        return;
    }
    let taps = kernel(frac);
    for (i, &x) in src.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let base = i as i64 + whole - HALF;
        for (j, &h) in taps.iter().enumerate() {
            let n = base + j as i64;
            if n >= 0 && (n as usize) < dst.len() {
                dst[n as usize] += gain * x * h;
            }
        }
    }
}

/// Delays a signal by a non-negative, possibly fractional number of samples
/// using 51-tap Hann-windowed sinc interpolation. The output keeps the input
/// length.
pub fn fractional_delay(signal: &[f64], delay: f64) -> Result<Vec<f64>> {
    if !(delay >= 0.0) || !delay.is_finite() {
        return Err(Error::invalid(format!(
            "delay must be finite and non-negative, got {delay}"
        )));
    }
    let mut out = vec![0.0; signal.len()];
    add_fractionally_delayed(&mut out, signal, delay, 1.0);
    Ok(out)
}
