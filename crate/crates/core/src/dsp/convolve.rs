use realfft::RealFftPlanner;

use crate::{Error, Result};

/// Products below this size are cheaper to evaluate directly.
const DIRECT_LIMIT: usize = 4096;

/// Full linear convolution, output length `signal.len() + ir.len() - 1`.
pub fn convolve(signal: &[f64], ir: &[f64]) -> Result<Vec<f64>> {
    if signal.is_empty() || ir.is_empty() {
        return Err(Error::invalid("convolution inputs must be non-empty"));
    }
    if signal.len().min(ir.len()) <= 16 || signal.len() * ir.len() <= DIRECT_LIMIT {
        return Ok(convolve_direct(signal, ir));
    }
    Ok(convolve_fft(signal, ir))
}

/// Time-domain convolution sum. Exposed for tests and tiny kernels.
pub fn convolve_direct(signal: &[f64], ir: &[f64]) -> Vec<f64> {
    if signal.is_empty() || ir.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; signal.len() + ir.len() - 1];
    for (i, &x) in signal.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (o, &h) in out[i..].iter_mut().zip(ir) {
            *o += x * h;
        }
    }
    out
}

fn convolve_fft(signal: &[f64], ir: &[f64]) -> Vec<f64> {
    let out_len = signal.len() + ir.len() - 1;
    let n = out_len.next_power_of_two();
    let mut planner = RealFftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut a = fwd.make_input_vec();
    a[..signal.len()].copy_from_slice(signal);
    let mut b = fwd.make_input_vec();
    b[..ir.len()].copy_from_slice(ir);
    let mut sa = fwd.make_output_vec();
    let mut sb = fwd.make_output_vec();
    fwd.process(&mut a, &mut sa).expect("planned sizes");
    fwd.process(&mut b, &mut sb).expect("planned sizes");
    for (x, y) in sa.iter_mut().zip(&sb) {
        *x *= *y;
    }
    // realfft requires purely real DC and Nyquist bins on inverse
    sa[0].im = 0.0;
    if let Some(last) = sa.last_mut() {
        last.im = 0.0;
    }
    let mut out = inv.make_output_vec();
    inv.process(&mut sa, &mut out).expect("planned sizes");
    let scale = 1.0 / n as f64;
    out.truncate(out_len);
    out.iter_mut().for_each(|x| *x *= scale);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent brute-force oracle: y[n] = sum_k x[k] h[n-k].
    fn oracle(x: &[f64], h: &[f64]) -> Vec<f64> {
        let len = x.len() + h.len() - 1;
        (0..len)
            .map(|n| {
                let mut acc = 0.0;
                for k in 0..x.len() {
                    if n >= k && n - k < h.len() {
                        acc += x[k] * h[n - k];
                    }
                }
                acc
            })
            .collect()
    }

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn identity_kernel() {
        let x = random(300, 1);
        assert_eq!(convolve(&x, &[1.0]).unwrap(), x);
    }

    #[test]
    fn shifted_delta_delays() {
        let x = random(300, 2);
        let mut h = vec![0.0; 8];
        h[7] = 1.0;
        let y = convolve(&x, &h).unwrap();
        assert_eq!(y.len(), 307);
        assert!(y[..7].iter().all(|&v| v == 0.0));
        assert_eq!(&y[7..], &x[..]);
    }

    #[test]
    fn random_100_by_50_matches_brute_force() {
        let x = random(100, 3);
        let h = random(50, 4);
        let y = convolve(&x, &h).unwrap();
        let expected = oracle(&x, &h);
        assert_eq!(y.len(), 149);
        for (a, b) in y.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn fft_path_matches_brute_force() {
        let x = random(3000, 5);
        let h = random(700, 6);
        let y = convolve(&x, &h).unwrap();
        for (a, b) in y.iter().zip(oracle(&x, &h)) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(convolve(&[], &[1.0]).is_err());
        assert!(convolve(&[1.0], &[]).is_err());
    }

    proptest! {
        #[test]
        fn convolution_is_linear(seed in 0u64..1000, a in -3.0f64..3.0, b in -3.0f64..3.0,
                                 n in 1usize..400, m in 1usize..200) {
            let x = random(n, seed);
            let y = random(n, seed + 1);
            let h = random(m, seed + 2);
            let mixed: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = convolve(&mixed, &h).unwrap();
            let cx = convolve(&x, &h).unwrap();
            let cy = convolve(&y, &h).unwrap();
            for i in 0..lhs.len() {
                prop_assert!((lhs[i] - (a * cx[i] + b * cy[i])).abs() < 1e-9);
            }
        }
    }
}
