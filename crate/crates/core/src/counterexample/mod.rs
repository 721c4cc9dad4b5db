//! The geometric family `û(n) = ε qⁿ`, `ε = β/|log(1−q)|`: the integrals `F±(μ, q)` whose
//! zero is the escaping eigenvalue `λ₀ = −μ_q`, and matrix cross-checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::hardy::{make_potential, PotentialFamily, PotentialSpectrum, WeightSpec, WeightedNorm};
use crate::lax::{assemble_lax_matrix, eigenvalues};
use crate::quadrature::gauss_jacobi_unit;
use crate::{Error, Result};

/// Relative change between successive quadrature orders accepted as converged.
pub const QUAD_TOL: f64 = 1e-10;
pub const QUAD_START: usize = 32;
pub const QUAD_MAX: usize = 8192;
/// Coefficient size below which the geometric tail is dropped.
pub const DECAY_FLOOR: f64 = 1e-12;
pub const DEFAULT_BRACKET: (f64, f64) = (1e-3, 1e3);
pub const SCAN_POINTS: usize = 200;

/// `ε = β/|log(1−q)|`; errors unless `0 < ε < q < 1`.
pub fn epsilon_of(beta: f64, q: f64) -> Result<f64> {
    if !(q.is_finite() && q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("q = {q} is outside (0, 1)")));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::invalid(format!("beta = {beta} must be positive")));
    }
    let eps = beta / (-q).ln_1p().abs();
    if eps >= q {
        return Err(Error::invalid(format!("eps = {eps} is not below q = {q}")));
    }
    Ok(eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleParams {
    pub beta: f64,
    pub q: f64,
    pub eps: f64,
}

impl CounterexampleParams {
    pub fn new(beta: f64, q: f64) -> Result<Self> {
        Ok(Self { beta, q, eps: epsilon_of(beta, q)? })
    }

    pub fn family(&self) -> PotentialFamily {
        PotentialFamily::Counterexample { beta: self.beta, q: self.q }
    }

    /// Smallest `M` with `ε q^M ≤ 1e−12`.
    pub fn decay_rule_m(&self) -> usize {
        ((DECAY_FLOOR / self.eps).ln() / self.q.ln()).ceil().max(1.0) as usize
    }

    pub fn potential(&self, n_max: usize) -> Result<PotentialSpectrum> {
        make_potential(&self.family(), n_max)
    }
}

/// `F₊ = μ q^μ ∫₀¹ s^{ε+μ−1}(1−q²s)^ε(1−s)^{−ε} ds` and
/// `F₋ = ε q^{μ+2} ∫₀¹ s^{ε+μ}(1−q²s)^{ε−1}(1−s)^{−ε} ds` at a fixed Gauss–Jacobi order.
pub fn f_parts(mu: f64, p: &CounterexampleParams, order: usize) -> Result<(f64, f64)> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::invalid(format!("mu = {mu} must be positive")));
    }
    let (e, q) = (p.eps, p.q);
    let q2 = q * q;
    let lq = q.ln();
    let plus = gauss_jacobi_unit(order, -e, e + mu - 1.0, mu.ln() + mu * lq)?
        .integrate(|s| (1.0 - q2 * s).powf(e));
    let minus = gauss_jacobi_unit(order, -e, e + mu, e.ln() + (mu + 2.0) * lq)?
        .integrate(|s| (1.0 - q2 * s).powf(e - 1.0));
    Ok((plus, minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FValue {
    pub plus: f64,
    pub minus: f64,
    /// Order at which successive doublings agreed.
    pub order: usize,
}

impl FValue {
    pub fn value(&self) -> f64 {
        self.plus - self.minus
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// `F±` with the order doubled from 32 until both change by less than `1e−10` relative.
pub fn f_parts_converged(mu: f64, p: &CounterexampleParams) -> Result<FValue> {
    let mut order = QUAD_START;
    let mut prev = f_parts(mu, p, order)?;
    loop {
        let next_order = 2 * order;
        if next_order > QUAD_MAX {
            return Err(Error::Quadrature {
                order,
                change: rel(prev.0, f_parts(mu, p, order / 2)?.0),
            });
        }
        let next = f_parts(mu, p, next_order)?;
        let change = rel(next.0, prev.0).max(rel(next.1, prev.1));
        if change < QUAD_TOL {
            return Ok(FValue { plus: next.0, minus: next.1, order: next_order });
        }
        prev = next;
        order = next_order;
    }
}

/// `F(μ, q) = F₊ − F₋`.
pub fn f_value(mu: f64, p: &CounterexampleParams) -> Result<f64> {
    Ok(f_parts_converged(mu, p)?.value())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuSearch {
    pub mu: Option<f64>,
    pub f_at_root: Option<f64>,
    /// Sign changes seen in the log-spaced pre-scan.
    pub sign_changes: usize,
    pub diagnostic: String,
}

/// Scans `F` at 200 log-spaced points of the bracket, then bisects the first sign change
/// and polishes with secant steps until `|F| < tol`.
pub fn find_mu(p: &CounterexampleParams, bracket: (f64, f64), tol: f64) -> Result<MuSearch> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid(format!("bracket [{lo}, {hi}] must satisfy 0 < lo < hi")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let ratio = (hi / lo).ln() / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|i| lo * (ratio * i as f64).exp()).collect();
    let vals: Vec<f64> = grid.par_iter().map(|&m| f_value(m, p)).collect::<Result<_>>()?;
    let changes: Vec<usize> = (1..SCAN_POINTS)
        .filter(|&i| (vals[i - 1] < 0.0) != (vals[i] < 0.0))
        .collect();
    let Some(&first) = changes.first() else {
        return Ok(MuSearch {
            mu: None,
            f_at_root: None,
            sign_changes: 0,
            diagnostic: format!(
                "no sign change of F on [{lo}, {hi}]: F({lo}) = {:.6e}, F({hi}) = {:.6e}",
                vals[0],
                vals[SCAN_POINTS - 1]
            ),
        });
    };
    let (mut a, mut fa) = (grid[first - 1], vals[first - 1]);
    let (mut b, mut fb) = (grid[first], vals[first]);
    for _ in 0..200 {
        if fa.abs() < tol || fb.abs() < tol || (b - a) <= 1e-14 * b {
            break;
        }
        let secant = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        // secant once the bracket is tight, bisection otherwise
        let x = if (b - a) < 1e-3 * b && secant > a && secant < b { secant } else { mid };
        let fx = f_value(x, p)?;
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    let (mu, f) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    Ok(MuSearch {
        mu: Some(mu),
        f_at_root: Some(f),
        sign_changes: changes.len(),
        diagnostic: format!("root bracketed in [{:.6}, {:.6}]", grid[first - 1], grid[first]),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lambda0Check {
    pub mu_q: Option<f64>,
    pub lambda0: f64,
    /// `|λ₀ + μ_q|/μ_q`, NaN without a root.
    pub relative_gap: f64,
    pub negative_count: usize,
    /// `γ₁ = λ₁ − λ₀ − 1` of the matrix.
    pub gamma1: f64,
    pub m: usize,
}

impl Lambda0Check {
    /// Root and matrix agree to `tol`, or neither sees an eigenvalue below `−1e−3`.
    pub fn consistent(&self, tol: f64) -> bool {
        match self.mu_q {
            Some(_) => self.relative_gap <= tol,
            None => self.lambda0 > -DEFAULT_BRACKET.0,
        }
    }
}

/// Compares `−μ_q` with the lowest eigenvalue of the truncated Lax matrix; `m` defaults
/// to the decay rule.
pub fn cross_validate_lambda0(p: &CounterexampleParams, m: Option<usize>) -> Result<Lambda0Check> {
    let m = m.unwrap_or_else(|| p.decay_rule_m());
    let search = find_mu(p, DEFAULT_BRACKET, 1e-12)?;
    let ev = eigenvalues(&assemble_lax_matrix(&p.potential(m)?, m)?)?;
    let lambda0 = ev[0];
    let relative_gap = search.mu.map_or(f64::NAN, |mu| (lambda0 + mu).abs() / mu);
    Ok(Lambda0Check {
        mu_q: search.mu,
        lambda0,
        relative_gap,
        negative_count: ev.iter().filter(|&&x| x < 0.0).count(),
        gamma1: ev[1] - ev[0] - 1.0,
        m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub q: f64,
    pub eps: f64,
    /// `‖u_{0,q}‖_{−1/2,√log}`.
    pub norm_sqrtlog: f64,
    /// `û(1) = εq`.
    pub coeff1: f64,
}

/// Phase-space norm and first coefficient along a `q` grid.
pub fn norm_and_weak_trend(beta: f64, qgrid: &[f64]) -> Result<Vec<NormRow>> {
    qgrid
        .iter()
        .map(|&q| {
            let p = CounterexampleParams::new(beta, q)?;
            let u = p.potential(p.decay_rule_m())?;
            Ok(NormRow {
                q,
                eps: p.eps,
                norm_sqrtlog: u.weighted_norm(&WeightSpec::PHASE_SPACE),
                coeff1: p.eps * q,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub q: f64,
    pub eps: f64,
    pub mu_q: f64,
    pub lambda0_matrix: f64,
    pub norm_sqrtlog: f64,
    pub xi_window_ratio: f64,
}

/// One row per `q`; `window` computes the windowed-observable ratio where the decay-rule
/// truncation is at most `window_max_m`, NaN elsewhere.
pub fn sweep(
    beta: f64,
    qgrid: &[f64],
    window: Option<(&crate::flow::ObservableOptions, usize)>,
) -> Result<Vec<SweepRow>> {
    qgrid
        .par_iter()
        .map(|&q| {
            let p = CounterexampleParams::new(beta, q)?;
            let check = cross_validate_lambda0(&p, None)?;
            let norm = norm_and_weak_trend(beta, &[q])?[0].norm_sqrtlog;
            let ratio = match window {
                Some((opts, max_m)) if check.mu_q.is_some() && 2 * p.decay_rule_m() <= max_m => {
                    crate::flow::weak_limit_observable(&p, opts)?.ratio
                }
                _ => f64::NAN,
            };
            Ok(SweepRow {
                q,
                eps: p.eps,
                mu_q: check.mu_q.unwrap_or(f64::NAN),
                lambda0_matrix: check.lambda0,
                norm_sqrtlog: norm,
                xi_window_ratio: ratio,
            })
        })
        .collect()
}
