use std::f64::consts::PI;

/// MDCT with hop `n` and a `2n` sine window; windowed overlap-add of
/// [`Mdct::inverse`] outputs reconstructs the input exactly (up to rounding).
#[derive(Debug, Clone)]
pub(crate) struct Mdct {
    n: usize,
    window: Vec<f64>,
    /// `[k][i]` basis, `cos(pi/n (i + 1/2 + n/2)(k + 1/2))`.
    basis: Vec<f64>,
}

impl Mdct {
    pub(crate) fn new(n: usize) -> Self {
        let two_n = 2 * n;
        let window = (0..two_n)
            .map(|i| (PI * (i as f64 + 0.5) / two_n as f64).sin())
            .collect();
        let nf = n as f64;
        let mut basis = Vec::with_capacity(n * two_n);
        for k in 0..n {
            for i in 0..two_n {
                basis.push((PI / nf * (i as f64 + 0.5 + nf / 2.0) * (k as f64 + 0.5)).cos());
            }
        }
        Self { n, window, basis }
    }

    pub(crate) fn hop(&self) -> usize {
        self.n
    }

    /// `2n` input samples to `n` coefficients.
    pub(crate) fn forward(&self, block: &[f64], out: &mut [f64]) {
        let two_n = 2 * self.n;
        let windowed: Vec<f64> = block.iter().zip(&self.window).map(|(x, w)| x * w).collect();
        for (k, o) in out.iter_mut().enumerate() {
            let row = &self.basis[k * two_n..(k + 1) * two_n];
            *o = row.iter().zip(&windowed).map(|(b, x)| b * x).sum();
        }
    }

    /// `n` coefficients to `2n` windowed samples, to be overlap-added.
    pub(crate) fn inverse(&self, coeffs: &[f64], out: &mut [f64]) {
        let two_n = 2 * self.n;
        out.iter_mut().for_each(|o| *o = 0.0);
        for (k, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let row = &self.basis[k * two_n..(k + 1) * two_n];
            for (o, b) in out.iter_mut().zip(row) {
                *o += c * b;
            }
        }
        let scale = 2.0 / self.n as f64;
        for (o, w) in out.iter_mut().zip(&self.window) {
            *o *= scale * w;
        }
    }
}
