use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;

use super::{assemble_lax_matrix, eigenvalues, LaxMatrix};
use crate::hardy::PotentialSpectrum;
use crate::{Error, Result};

/// Minimum distance between `−λ` and the spectrum.
pub const SINGULAR_TOL: f64 = 1e-8;

/// `⟨(A + λ)^{-1} e₀ | e₀⟩` for the truncated Lax matrix of `u`.
pub fn resolvent_form(u: &PotentialSpectrum, lambda: f64, m: usize) -> Result<Complex64> {
    let a = assemble_lax_matrix(u, m)?;
    let spectrum = eigenvalues(&a)?;
    resolvent_form_with(&a, &spectrum, lambda)
}

/// Same as [`resolvent_form`] with a precomputed ascending spectrum of `a`.
pub fn resolvent_form_with(a: &LaxMatrix, spectrum: &[f64], lambda: f64) -> Result<Complex64> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite("resolvent parameter"));
    }
    if let Some((index, distance)) = spectrum
        .iter()
        .map(|l| (l + lambda).abs())
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1))
    {
        if distance < SINGULAR_TOL {
            return Err(Error::NearSingular { index, shift: -lambda, distance });
        }
    }
    let n = a.size();
    let mut shifted = a.to_dense();
    for i in 0..n {
        shifted[(i, i)] += Complex64::new(lambda, 0.0);
    }
    let mut rhs = Mat::<Complex64>::zeros(n, 1);
    rhs[(0, 0)] = Complex64::new(1.0, 0.0);
    let g = shifted.partial_piv_lu().solve(&rhs);
    Ok(g[(0, 0)])
}
