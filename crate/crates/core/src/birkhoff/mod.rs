//! Norming constants, the Birkhoff map `Φₙ(u) = ⟨1|fₙ⟩ / √κₙ` and its structural
//! identities, differentials at the origin, and a least-squares inverse.

mod inverse;
mod jacobian;

pub use inverse::{birkhoff_inverse, InverseOptions, InverseResult, IterationLog, JacobianKind};
pub use jacobian::{
    birkhoff_jacobian, birkhoff_jacobian_with, forward_difference_jacobian, forward_difference_jacobian_with,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dd::Dot2;
use crate::hardy::{LogMode, PotentialSpectrum, WeightSpec};
use crate::lax::{
    assemble_lax_matrix, eigendecompose, eigendecompose_with, resolvent_form_with, Precision, SpectralData,
};
use crate::{Error, Result};

/// `ζ₁..ζ_K` with the norming constants and gaps they were built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffCoordinates {
    /// `zetas[n - 1] = ζₙ`.
    pub zetas: Vec<Complex64>,
    /// `kappas[n] = κₙ`, `n = 0..=K`.
    pub kappas: Vec<f64>,
    /// `actions[n - 1] = |ζₙ|²`.
    pub actions: Vec<f64>,
    /// Clamped spectral gaps `γ₁..γ_K`.
    pub gaps: Vec<f64>,
}

impl BirkhoffCoordinates {
    pub fn len(&self) -> usize {
        self.zetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zetas.is_empty()
    }
}

/// `κ₀ = Π_{p≤K} (1 − γ_p/(λ_p − λ₀))` and
/// `κₙ = (λₙ − λ₀)^{-1} Π_{p≤K, p≠n} (1 − γ_p/(λ_p − λₙ))`, with `K = reliable_count`.
pub fn norming_constants(sd: &SpectralData) -> Result<Vec<f64>> {
    let k = sd.reliable_count();
    let gaps = sd.clamped_gaps()?;
    (0..=k)
        .map(|n| {
            let mut log = Dot2::default();
            for p in 1..=k {
                if p != n {
                    let x = -gaps[p - 1] / sd.lambda_diff(p, n);
                    if 1.0 + x <= 0.0 {
                        return Err(Error::NonPositiveFactor { index: n, p, factor: 1.0 + x });
                    }
                    log.add(x.ln_1p());
                }
            }
            let base = if n == 0 { 0.0 } else { -sd.lambda_diff(n, 0).ln() };
            log.add(base);
            Ok(log.value().exp())
        })
        .collect()
}

/// Coordinates from an already decomposed Lax matrix.
pub fn birkhoff_from_spectral(sd: &SpectralData) -> Result<BirkhoffCoordinates> {
    let kappas = norming_constants(sd)?;
    let gaps = sd.clamped_gaps()?;
    let zetas: Vec<Complex64> = (1..=sd.reliable_count())
        .map(|n| sd.inner1()[n] / kappas[n].sqrt())
        .collect();
    let actions = zetas.iter().map(|z| z.norm_sqr()).collect();
    Ok(BirkhoffCoordinates { zetas, kappas, actions, gaps })
}

/// Assemble, decompose, normalize and map to `ζₙ`, `n = 1..=M/2`.
pub fn birkhoff_forward(u: &PotentialSpectrum, m: usize) -> Result<BirkhoffCoordinates> {
    birkhoff_forward_with(u, m, Precision::Compensated)
}

pub fn birkhoff_forward_with(u: &PotentialSpectrum, m: usize, precision: Precision) -> Result<BirkhoffCoordinates> {
    let sd = eigendecompose_with(&assemble_lax_matrix(u, m)?, precision)?;
    birkhoff_from_spectral(&sd)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratingCheck {
    /// `⟨(A + λ)^{-1} e₀ | e₀⟩`.
    pub lhs: f64,
    /// `(λ₀ + λ)^{-1} Π_{n≤K} (1 − γₙ/(λₙ + λ))`.
    pub rhs: f64,
    pub relative_gap: f64,
}

/// Resolvent quadratic form against its product expansion over the reliable gaps.
pub fn generating_function_check(u: &PotentialSpectrum, lambda: f64, m: usize) -> Result<GeneratingCheck> {
    let a = assemble_lax_matrix(u, m)?;
    let sd = eigendecompose(&a)?;
    generating_function_check_with(&a, &sd, lambda)
}

pub(crate) fn generating_function_check_with(
    a: &crate::lax::LaxMatrix,
    sd: &SpectralData,
    lambda: f64,
) -> Result<GeneratingCheck> {
    let lhs = resolvent_form_with(a, sd.lambdas(), lambda)?.re;
    let gaps = sd.clamped_gaps()?;
    let mut log = Dot2::default();
    for (i, g) in gaps.iter().enumerate() {
        log.add((-g / (sd.lambda(i + 1) + lambda)).ln_1p());
    }
    let rhs = log.value().exp() / (sd.lambda(0) + lambda);
    Ok(GeneratingCheck { lhs, rhs, relative_gap: ((lhs - rhs) / lhs).abs() })
}

/// `𝔥^{1/2,√log}` norm over `n ≤ K` of `⟨v|fₙ⟩/(λₙ − λ₀ + 1) − ⟨1|fₙ⟩` with
/// `v = −Πu − λ₀ + 1`.
pub fn diagonal_identity_residual(u: &PotentialSpectrum, m: usize) -> Result<f64> {
    let sd = eigendecompose(&assemble_lax_matrix(u, m)?)?;
    Ok(diagonal_identity_residual_with(u, &sd))
}

pub(crate) fn diagonal_identity_residual_with(u: &PotentialSpectrum, sd: &SpectralData) -> f64 {
    let size = sd.m() + 1;
    let mut v = Vec::with_capacity(size);
    v.push(Complex64::new(1.0 - sd.lambda(0), 0.0));
    v.extend((1..size as i64).map(|k| -u.coeff(k)));
    let w = WeightSpec::new(0.5, LogMode::SqrtLog);
    let mut total = 0.0;
    for n in 0..=sd.reliable_count() {
        let mut re = Dot2::default();
        let mut im = Dot2::default();
        for (j, vj) in v.iter().enumerate() {
            let f = sd.eigvecs()[(j, n)].conj();
            re.add_prod(vj.re, f.re);
            re.add_prod(-vj.im, f.im);
            im.add_prod(vj.re, f.im);
            im.add_prod(vj.im, f.re);
        }
        let c = Complex64::new(re.value(), im.value());
        let d = c / (sd.lambda_diff(n, 0) + 1.0) - sd.inner1()[n];
        total += w.weight(n as i64) * d.norm_sqr();
    }
    total.sqrt()
}

/// `d₀Φ(ξ)ₙ = −ξ̂(n)/√n`, `n = 1..=ξ.n_max`.
pub fn differential_at_zero(xi: &PotentialSpectrum) -> Vec<Complex64> {
    xi.coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| -c / ((i + 1) as f64).sqrt())
        .collect()
}

/// Quadratic Taylor term of `Φ` at the origin, `Φ(εξ) = ε d₀Φ(ξ) + ε² d²₀Φ(ξ) + O(ε³)`:
/// `d²₀Φ(ξ)ₙ = n^{-1/2} Σ_{k≥0, k≠n} ξ̂(k) ξ̂(n−k)/(n−k)` for `n = 1..=2 ξ.n_max`.
pub fn second_differential_at_zero(xi: &PotentialSpectrum) -> Vec<Complex64> {
    let nm = xi.n_max() as i64;
    (1..=2 * nm)
        .map(|n| {
            let s: Complex64 = (1..=nm)
                .filter(|&k| k != n)
                .map(|k| xi.coeff(k) * xi.coeff(n - k) / (n - k) as f64)
                .sum();
            s / (n as f64).sqrt()
        })
        .collect()
}
