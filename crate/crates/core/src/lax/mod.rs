//! The truncated Lax operator `L_u = D − T_u` on modes `0..=M`, its ordered spectrum,
//! phase-normalized eigenbasis, gaps and resolvent quadratic form.

mod refine;
mod resolvent;

pub use resolvent::{resolvent_form, resolvent_form_with};

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::dd::{Dd, Dot2};
use crate::hardy::PotentialSpectrum;
use crate::{Error, Result};

/// Eigenvalues closer than this are a truncation failure.
pub const COLLISION_TOL: f64 = 1e-10;
/// Negative gaps above `-GAP_TOL` are clamped to zero.
pub const GAP_TOL: f64 = 1e-8;
/// Smallest admissible magnitude of a phase-fixing inner product.
pub const PHASE_FLOOR: f64 = 1e-13;

/// Arithmetic used for the reliable eigenpairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// Residual correction with compensated sums; gaps resolved far below `ε·n`.
    #[default]
    Compensated,
    /// Plain dense eigenpairs; eigenvector entries accurate to working precision only.
    Standard,
}

impl Precision {
    /// Compensated up to `M = 256`, standard above.
    pub fn auto(m: usize) -> Self {
        if m <= 256 {
            Precision::Compensated
        } else {
            Precision::Standard
        }
    }
}

/// `entry(m, n) = m δ_{mn} − û(m − n)` for `0 ≤ m, n ≤ M`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaxMatrix {
    m: usize,
    /// `û(1)..û(b)` with `b = min(u.n_max, M)`.
    coeffs: Vec<Complex64>,
}

pub fn assemble_lax_matrix(u: &PotentialSpectrum, m: usize) -> Result<LaxMatrix> {
    if m < 1 {
        return Err(Error::invalid("Lax truncation M must be at least 1"));
    }
    let b = u.n_max().min(m);
    let coeffs = u.coeffs()[..b].to_vec();
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("potential coefficients"));
    }
    Ok(LaxMatrix { m, coeffs })
}

impl LaxMatrix {
    /// Highest mode `M`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Matrix dimension `M + 1`.
    pub fn size(&self) -> usize {
        self.m + 1
    }

    /// Number of nonzero off-diagonals on each side.
    pub fn bandwidth(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// `û(k)` as seen by the truncated operator.
    #[inline]
    pub fn coeff(&self, k: i64) -> Complex64 {
        let a = k.unsigned_abs() as usize;
        if a == 0 || a > self.coeffs.len() {
            Complex64::new(0.0, 0.0)
        } else if k > 0 {
            self.coeffs[a - 1]
        } else {
            self.coeffs[a - 1].conj()
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        let diag = if row == col { row as f64 } else { 0.0 };
        Complex64::new(diag, 0.0) - self.coeff(row as i64 - col as i64)
    }

    pub fn to_dense(&self) -> Mat<Complex64> {
        Mat::from_fn(self.size(), self.size(), |i, j| self.entry(i, j))
    }

    fn to_dense_real(&self) -> Mat<f64> {
        Mat::from_fn(self.size(), self.size(), |i, j| self.entry(i, j).re)
    }

    /// `A x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.size();
        let b = self.bandwidth();
        (0..n)
            .map(|row| {
                let lo = row.saturating_sub(b);
                let hi = (row + b).min(n - 1);
                (lo..=hi).map(|col| self.entry(row, col) * x[col]).sum()
            })
            .collect()
    }

    /// `(A − shift) x` evaluated with compensated sums; `shift = base + offset`.
    pub(crate) fn shifted_residual(&self, x: &[Complex64], base: f64, offset: Dd) -> Vec<Complex64> {
        let n = self.size();
        let b = self.bandwidth() as i64;
        (0..n)
            .map(|row| {
                let mut re = Dot2::default();
                let mut im = Dot2::default();
                let d = row as f64 - base;
                let xr = x[row];
                re.add_prod(d, xr.re);
                im.add_prod(d, xr.im);
                re.add_prod(-offset.hi, xr.re);
                im.add_prod(-offset.hi, xr.im);
                re.add_prod(-offset.lo, xr.re);
                im.add_prod(-offset.lo, xr.im);
                let lo = (row as i64 - b).max(0);
                let hi = (row as i64 + b).min(n as i64 - 1);
                for col in lo..=hi {
                    if col == row as i64 {
                        continue;
                    }
                    let c = self.coeff(row as i64 - col);
                    let y = x[col as usize];
                    re.add_prod(-c.re, y.re);
                    re.add_prod(c.im, y.im);
                    im.add_prod(-c.re, y.im);
                    im.add_prod(-c.im, y.re);
                }
                Complex64::new(re.value(), im.value())
            })
            .collect()
    }
}

/// Ordered spectrum and phase-normalized eigenbasis of a truncated Lax matrix.
#[derive(Debug, Clone)]
pub struct SpectralData {
    m: usize,
    lambdas: Vec<f64>,
    /// `λₙ − n` in extended precision for `n ≤ reliable_count`.
    offsets: Vec<Dd>,
    eigvecs: Mat<Complex64>,
    gaps: Vec<f64>,
    inner1: Vec<Complex64>,
    reliable_count: usize,
}

impl SpectralData {
    /// `λ₀ < λ₁ < … < λ_M`.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn lambda(&self, n: usize) -> f64 {
        self.lambdas[n]
    }

    /// `λₙ − n`, extended-precision for `n ≤ reliable_count`.
    pub fn offset(&self, n: usize) -> f64 {
        match self.offsets.get(n) {
            Some(d) => d.to_f64(),
            None => self.lambdas[n] - n as f64,
        }
    }

    /// `λ_p − λ_n` without cancellation.
    pub fn lambda_diff(&self, p: usize, n: usize) -> f64 {
        let base = p as f64 - n as f64;
        match (self.offsets.get(p), self.offsets.get(n)) {
            (Some(a), Some(b)) => a.sub(*b).add_f64(base).to_f64(),
            _ => base + (self.offset(p) - self.offset(n)),
        }
    }

    /// Column `n` is `fₙ`.
    pub fn eigvecs(&self) -> &Mat<Complex64> {
        &self.eigvecs
    }

    pub fn eigvec(&self, n: usize) -> Vec<Complex64> {
        self.eigvecs.col(n).iter().copied().collect()
    }

    /// `γ₁..γ_M`; `gaps()[n - 1] = γₙ`.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    pub fn gap(&self, n: usize) -> f64 {
        self.gaps[n - 1]
    }

    /// `⟨1|fₙ⟩ = conj(f̂ₙ(0))`.
    pub fn inner1(&self) -> &[Complex64] {
        &self.inner1
    }

    pub fn reliable_count(&self) -> usize {
        self.reliable_count
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `γ₁..γ_K` with tiny negative values set to zero.
    pub fn clamped_gaps(&self) -> Result<Vec<f64>> {
        self.gaps[..self.reliable_count]
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                if g >= 0.0 {
                    Ok(g)
                } else if g >= -GAP_TOL {
                    Ok(0.0)
                } else {
                    Err(Error::NegativeGap { index: i + 1, gap: g })
                }
            })
            .collect()
    }

    fn fill_derived(&mut self) {
        let k = self.reliable_count;
        self.gaps = (1..=self.m)
            .map(|n| {
                if n <= k {
                    self.offsets[n].sub(self.offsets[n - 1]).to_f64()
                } else {
                    self.lambdas[n] - self.lambdas[n - 1] - 1.0
                }
            })
            .collect();
        self.inner1 = (0..=self.m).map(|n| self.eigvecs[(0, n)].conj()).collect();
    }
}

/// Dense eigensolve, ordering, collision check, extended-precision refinement of the
/// reliable pairs and phase normalization.
pub fn eigendecompose(a: &LaxMatrix) -> Result<SpectralData> {
    eigendecompose_with(a, Precision::Compensated)
}

/// [`eigendecompose`] with a choice of arithmetic for the reliable pairs.
pub fn eigendecompose_with(a: &LaxMatrix, precision: Precision) -> Result<SpectralData> {
    let (lambdas, eigvecs) = dense_eigen(a)?;
    check_collisions(&lambdas)?;
    let k = a.m() / 2;
    let (lambdas, offsets, eigvecs) = match precision {
        Precision::Compensated => {
            let refined = refine::refine(a, lambdas, eigvecs, k);
            check_collisions(&refined.0)?;
            refined
        }
        Precision::Standard => {
            let offsets = (0..=k).map(|n| Dd::new(lambdas[n]).add_f64(-(n as f64))).collect();
            (lambdas, offsets, eigvecs)
        }
    };
    let mut sd = SpectralData {
        m: a.m(),
        lambdas,
        offsets,
        eigvecs,
        gaps: Vec::new(),
        inner1: Vec::new(),
        reliable_count: k,
    };
    sd.fill_derived();
    normalize_phases(sd)
}

/// Ascending eigenvalues of `A` without eigenvectors.
pub fn eigenvalues(a: &LaxMatrix) -> Result<Vec<f64>> {
    let mut ev = if a.is_real() {
        a.to_dense_real().self_adjoint_eigenvalues(Side::Lower)
    } else {
        a.to_dense().self_adjoint_eigenvalues(Side::Lower)
    }
    .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    if ev.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

fn dense_eigen(a: &LaxMatrix) -> Result<(Vec<f64>, Mat<Complex64>)> {
    let n = a.size();
    let (vals, vecs): (Vec<f64>, Mat<Complex64>) = if a.is_real() {
        let evd = a
            .to_dense_real()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let u = evd.U();
        (
            (0..n).map(|i| s[i]).collect(),
            Mat::from_fn(n, n, |i, j| Complex64::new(u[(i, j)], 0.0)),
        )
    } else {
        let evd = a
            .to_dense()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        ((0..n).map(|i| s[i].re).collect(), evd.U().to_owned())
    };
    if vals.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let lambdas = order.iter().map(|&i| vals[i]).collect();
    let eigvecs = Mat::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    Ok((lambdas, eigvecs))
}

fn check_collisions(lambdas: &[f64]) -> Result<()> {
    for n in 1..lambdas.len() {
        let sep = lambdas[n] - lambdas[n - 1];
        if sep < COLLISION_TOL {
            return Err(Error::EigenvalueCollision { index: n, separation: sep });
        }
    }
    Ok(())
}

/// Fixes the eigenvector phases so that `⟨f₀|1⟩ > 0` and `⟨fₙ|S fₙ₋₁⟩ > 0`.
///
/// Degenerate inner products are an error for the reliable modes; above them the phase
/// is left untouched.
pub fn normalize_phases(mut sd: SpectralData) -> Result<SpectralData> {
    let n = sd.m + 1;
    let r = sd.eigvecs[(0, 0)];
    if r.norm() < PHASE_FLOOR {
        return Err(Error::DegenerateNormalization { index: 0, magnitude: r.norm() });
    }
    rotate(&mut sd.eigvecs, 0, r.conj() / r.norm());
    for col in 1..n {
        let p: Complex64 = (1..n)
            .map(|j| sd.eigvecs[(j, col)] * sd.eigvecs[(j - 1, col - 1)].conj())
            .sum();
        if p.norm() < PHASE_FLOOR {
            if col <= sd.reliable_count {
                return Err(Error::DegenerateNormalization { index: col, magnitude: p.norm() });
            }
            continue;
        }
        rotate(&mut sd.eigvecs, col, p.conj() / p.norm());
    }
    sd.inner1 = (0..n).map(|c| sd.eigvecs[(0, c)].conj()).collect();
    Ok(sd)
}

fn rotate(v: &mut Mat<Complex64>, col: usize, phase: Complex64) {
    for i in 0..v.nrows() {
        v[(i, col)] *= phase;
    }
}

/// `(γ₁..γ_M, |Σ_{n≤K} γₙ + λ₀|)`.
pub fn gaps_and_trace(sd: &SpectralData) -> (Vec<f64>, f64) {
    let mut acc = Dot2::default();
    for &g in &sd.gaps[..sd.reliable_count] {
        acc.add(g);
    }
    acc.add(sd.lambdas[0]);
    (sd.gaps.clone(), acc.value().abs())
}

/// `Σ_{n≤K} γₙ + λ₀` telescopes to `λ_K − K`, evaluated from the refined offsets.
pub fn trace_residual(sd: &SpectralData) -> f64 {
    sd.offset(sd.reliable_count).abs()
}

/// `S f`: `(S f)^(k) = f̂(k − 1)`, truncated to the same length.
pub fn shift(f: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
    out[1..].copy_from_slice(&f[..f.len() - 1]);
    out
}

#[cfg(test)]
mod tests;
