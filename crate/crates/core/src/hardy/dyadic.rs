//! Littlewood–Paley blocks built from a C² smoothstep cutoff.

use num_complex::Complex64;

use super::HardyFunction;

/// `ψ(ξ)`: 1 on `|ξ| ≤ 1/2`, 0 on `|ξ| ≥ 1`, quintic smoothstep in between.
pub fn cutoff(xi: f64) -> f64 {
    let a = xi.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        let t = (a - 0.5) / 0.5;
        1.0 - t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    }
}

/// `φ(ξ) = ψ(ξ/2) − ψ(ξ)`, supported in `1/2 < |ξ| < 2`.
fn annulus(xi: f64) -> f64 {
    cutoff(xi / 2.0) - cutoff(xi)
}

/// Number of annuli needed so that `2^{n-1} ≥ |ξ|` for the last one.
fn annuli_count(max_abs: f64) -> usize {
    let mut n = 0;
    while 2f64.powi(n as i32 - 1) < max_abs {
        n += 1;
    }
    n
}

/// `ψ(ξ) + Σ_{n≥0} φ(ξ/2ⁿ)`; identically 1.
pub fn dyadic_partition_sum(xi: f64) -> f64 {
    (0..=annuli_count(xi.abs()))
        .map(|n| annulus(xi / 2f64.powi(n as i32)))
        .sum::<f64>()
        + cutoff(xi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicBlock {
    /// `-1` for the low-frequency block `ψ(D)f`, otherwise `n` for `φ(D/2ⁿ)f`.
    pub index: i32,
    pub f: HardyFunction,
}

/// Splits `f` into `f₋₁ = ψ(D) f` and `fₙ = φ(D/2ⁿ) f`, `n = 0, 1, ...`, until the
/// annuli cover every represented mode.
pub fn dyadic_decompose(f: &HardyFunction) -> Vec<DyadicBlock> {
    let n_max = f.n_max();
    let mut blocks = Vec::new();
    let apply = |mult: &dyn Fn(f64) -> f64| {
        HardyFunction::new(
            f.coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c * mult(k as f64))
                .collect::<Vec<Complex64>>(),
        )
        .expect("scaling finite coefficients by [0, 1] stays finite")
    };
    blocks.push(DyadicBlock { index: -1, f: apply(&cutoff) });
    for n in 0..=annuli_count(n_max as f64) {
        let scale = 2f64.powi(n as i32);
        blocks.push(DyadicBlock {
            index: n as i32,
            f: apply(&|xi| annulus(xi / scale)),
        });
    }
    blocks
}

/// `Σₙ 2^{2sn} ‖fₙ‖²` with the low block weighted by 1.
pub fn dyadic_norm_sq(blocks: &[DyadicBlock], s: f64) -> f64 {
    blocks
        .iter()
        .map(|b| {
            let w = 2f64.powf(2.0 * s * b.index.max(0) as f64);
            w * b.f.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()
        })
        .sum()
}
