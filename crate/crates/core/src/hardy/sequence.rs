//! Sequence-space witnesses: the quadratic form `Q` and the slowly divergent weights
//! showing that `Q` does not map into the log-weighted target space.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::grid;

/// `Q(x)_n = n^{-1/2} Σ_{k≥0, k≠n} x_k x_{n-k} / (n - k)` for `n = 1..=n_out`.
///
/// `x[k - 1]` holds `x_k` for `k ≥ 1`; the sequence is even (`x_{-k} = x_k`), `x_0 = 0`,
/// and zero beyond the slice. Direct double sum, `O(n_out · x.len())`.
pub fn q_form(x: &[f64], n_out: usize) -> Vec<f64> {
    let len = x.len() as i64;
    let at = |j: i64| -> f64 {
        let a = j.abs();
        if a == 0 || a > len {
            0.0
        } else {
            x[(a - 1) as usize]
        }
    };
    (1..=n_out as i64)
        .map(|n| {
            let mut s = 0.0;
            for k in 1..=len {
                let j = n - k;
                if j != 0 {
                    s += x[(k - 1) as usize] * at(j) / j as f64;
                }
            }
            s / (n as f64).sqrt()
        })
        .collect()
}

/// Same values as [`q_form`], computed as one linear convolution by FFT.
pub fn q_form_fft(x: &[f64], n_out: usize) -> Vec<f64> {
    let len = x.len();
    if len == 0 {
        return vec![0.0; n_out];
    }
    // x lives on [1, len], y_j = x_|j| / j on [-len, len]; products land in [1 - len, 2 len]
    let p = grid::pow2_at_least(3 * len + 2);
    let mut buf = vec![Complex64::new(0.0, 0.0); p];
    for (i, &xk) in x.iter().enumerate() {
        let k = (i + 1) as i64;
        buf[k as usize].re = xk;
        let yk = xk / k as f64;
        buf[k as usize].im = yk;
        buf[grid::slot(-k, p)].im = -yk;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(p).process(&mut buf);
    // split the packed transform of the real sequences x and y, then multiply
    let mut prod = vec![Complex64::new(0.0, 0.0); p];
    for m in 0..p {
        let a = buf[m];
        let b = buf[(p - m) % p].conj();
        let fx = (a + b) * 0.5;
        let fy = (a - b) * Complex64::new(0.0, -0.5);
        prod[m] = fx * fy;
    }
    planner.plan_fft_inverse(p).process(&mut prod);
    let scale = 1.0 / p as f64;
    (1..=n_out)
        .map(|n| {
            if n > 2 * len {
                0.0
            } else {
                prod[n].re * scale / (n as f64).sqrt()
            }
        })
        .collect()
}

/// `log(log(⟨n⟩ + 1))`, negative at `n = 1`.
fn loglog(n: usize) -> f64 {
    ((n as f64) + 1.0).ln().ln()
}

/// `a_n = 1 / (√(n log(n+1)) (log log(n+1))^{3/4})` for `n = 1..=n`; `a_1 := 0` since
/// `log log 2 < 0`.
pub fn a_sequence(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            if k < 2 {
                0.0
            } else {
                let kf = k as f64;
                1.0 / ((kf * (kf + 1.0).ln()).sqrt() * loglog(k).powf(0.75))
            }
        })
        .collect()
}

/// `x_n = √(n / log(n+1)) a_n = 1 / (log(n+1) (log log(n+1))^{3/4})`, with `x_1 := 0`.
pub fn obstruction_x(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            if k < 2 {
                0.0
            } else {
                1.0 / ((k as f64 + 1.0).ln() * loglog(k).powf(0.75))
            }
        })
        .collect()
}

/// Cumulative sums for `n = 1..=N`; index `n - 1` holds the sum up to `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceReport {
    pub a: Vec<f64>,
    /// `Σ (log log(n+1))^{1/2} a_n²`, over `n ≥ 2`.
    pub weighted_partial: Vec<f64>,
    /// `Σ a_n²`.
    pub l2_partial: Vec<f64>,
}

impl DivergenceReport {
    pub fn weighted_at(&self, n: usize) -> f64 {
        self.weighted_partial[n - 1]
    }

    pub fn l2_at(&self, n: usize) -> f64 {
        self.l2_partial[n - 1]
    }
}

pub fn divergence_witness(n: usize) -> crate::Result<DivergenceReport> {
    if n < 10 {
        return Err(crate::Error::invalid(format!("divergence cutoff {n} < 10")));
    }
    let a = a_sequence(n);
    let mut weighted_partial = Vec::with_capacity(n);
    let mut l2_partial = Vec::with_capacity(n);
    let (mut s, mut l2) = (0.0, 0.0);
    for (i, &ak) in a.iter().enumerate() {
        let k = i + 1;
        if k >= 2 {
            s += loglog(k).sqrt() * ak * ak;
        }
        l2 += ak * ak;
        weighted_partial.push(s);
        l2_partial.push(l2);
    }
    Ok(DivergenceReport { a, weighted_partial, l2_partial })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstructionRow {
    pub n: usize,
    /// `Σ_{m≤N} Q(x)_m²`.
    pub q_l2_sq: f64,
    /// `Σ_{m≤N} log(m+1) Q(x)_m²`.
    pub q_sqrtlog_sq: f64,
    /// `‖x‖²_{-1/2,√log}` over `|m| ≤ N`.
    pub x_norm_sq: f64,
}

/// Partial norms of `Q(x)` at each checkpoint, with `x` held fixed on `support` modes.
pub fn obstruction_witness(checkpoints: &[usize], support: usize) -> crate::Result<Vec<ObstructionRow>> {
    let n_out = checkpoints.iter().copied().max().unwrap_or(0);
    if n_out == 0 {
        return Err(crate::Error::invalid("no checkpoints"));
    }
    if support < n_out {
        return Err(crate::Error::invalid(format!(
            "support {support} is below the largest checkpoint {n_out}"
        )));
    }
    let x = obstruction_x(support);
    let q = q_form_fft(&x, n_out);
    let mut rows = Vec::with_capacity(checkpoints.len());
    let (mut l2, mut lg, mut xn) = (0.0, 0.0, 0.0);
    let mut m = 0;
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    for n in sorted {
        while m < n {
            let mf = (m + 1) as f64;
            let qm = q[m];
            l2 += qm * qm;
            lg += (mf + 1.0).ln() * qm * qm;
            xn += 2.0 * (mf + 1.0).ln() / mf * x[m] * x[m];
            m += 1;
        }
        rows.push(ObstructionRow { n, q_l2_sq: l2, q_sqrtlog_sq: lg, x_norm_sq: xn });
    }
    Ok(rows)
}
