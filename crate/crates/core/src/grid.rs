//! Uniform-grid synthesis and analysis of truncated Fourier series on the torus.
//!
//! Coefficients follow `u(x) = sum_k c_k e^{ikx}` with `c_k = (1/N) sum_j u(x_j) e^{-ikx_j}`,
//! `x_j = 2 pi j / N`.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Position of frequency `k` in an FFT buffer of length `n`.
#[inline]
pub(crate) fn slot(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

/// Samples `sum_{|k| <= kmax} coeff(k) e^{ikx_j}` on an `n`-point grid.
///
/// Panics if `n <= 2 * kmax` (the grid would alias).
pub fn synthesize(kmax: usize, n: usize, coeff: impl Fn(i64) -> Complex64) -> Vec<Complex64> {
    assert!(n > 2 * kmax, "grid of {n} points aliases modes up to {kmax}");
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for k in -(kmax as i64)..=(kmax as i64) {
        buf[slot(k, n)] = coeff(k);
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

/// Fourier coefficients of grid samples; entry `slot(k, n)` holds `c_k`.
pub fn analyze(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Smallest power of two that is at least `n`.
pub(crate) fn pow2_at_least(n: usize) -> usize {
    n.max(1).next_power_of_two()
}
