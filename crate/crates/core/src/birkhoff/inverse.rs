//! Damped Gauss–Newton for `min_u ‖Φ(u) − ζ‖²`.

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{birkhoff_forward_with, birkhoff_jacobian_with, forward_difference_jacobian_with};
use crate::lax::Precision;
use crate::hardy::PotentialSpectrum;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianKind {
    ForwardDifference,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseOptions {
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub gradient_tol: f64,
    /// Step halvings tried before giving up on a Gauss–Newton direction.
    pub max_halvings: usize,
    pub jacobian: JacobianKind,
    #[serde(default)]
    pub precision: Precision,
    /// Starting point; defaults to the linearization `û(n) = −√n ζₙ`.
    pub initial: Option<PotentialSpectrum>,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            residual_tol: 1e-10,
            gradient_tol: 1e-12,
            max_halvings: 30,
            jacobian: JacobianKind::ForwardDifference,
            precision: Precision::Compensated,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub residual: f64,
    pub step_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseResult {
    /// Best iterate found.
    pub u: PotentialSpectrum,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub log: Vec<IterationLog>,
}

impl InverseResult {
    /// The potential if the solve converged, otherwise an error carrying the residual.
    pub fn into_converged(self) -> Result<PotentialSpectrum> {
        if self.converged {
            Ok(self.u)
        } else {
            Err(Error::InverseNotConverged { residual: self.residual, iterations: self.iterations })
        }
    }
}

fn residual(u: &PotentialSpectrum, target: &[Complex64], m: usize, precision: Precision) -> Result<(Vec<f64>, f64)> {
    let z = birkhoff_forward_with(u, m, precision)?;
    let r: Vec<f64> = z.zetas[..target.len()]
        .iter()
        .zip(target)
        .flat_map(|(a, b)| {
            let d = a - b;
            [d.re, d.im]
        })
        .collect();
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok((r, norm))
}

/// Recovers `û(1)..û(N)` from `ζ₁..ζ_N` on a Lax truncation `M ≥ 2N`.
///
/// Non-convergence is not an error: the best iterate is returned with
/// `converged = false`.
pub fn birkhoff_inverse(target: &[Complex64], m: usize, opts: &InverseOptions) -> Result<InverseResult> {
    let n = target.len();
    if n == 0 {
        return Err(Error::invalid("empty Birkhoff target"));
    }
    if n > m / 2 {
        return Err(Error::invalid(format!("{n} coordinates need M >= {}, got {m}", 2 * n)));
    }
    if target.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("Birkhoff target"));
    }
    let mut u = match &opts.initial {
        Some(init) => init.resized(n)?,
        None => PotentialSpectrum::new(
            target.iter().enumerate().map(|(i, z)| -z * ((i + 1) as f64).sqrt()).collect(),
        )?,
    };
    let (mut res, mut norm) = residual(&u, target, m, opts.precision)?;
    let mut log = Vec::new();
    let mut iterations = 0;
    let mut converged = norm < opts.residual_tol;
    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let (_, jac) = match opts.jacobian {
            JacobianKind::ForwardDifference => forward_difference_jacobian_with(&u, m, n, opts.precision)?,
            JacobianKind::Analytic => birkhoff_jacobian_with(&u, m, n, opts.precision)?,
        };
        let rvec = Mat::from_fn(res.len(), 1, |i, _| res[i]);
        let grad = jac.transpose() * &rvec;
        let gnorm = (0..grad.nrows()).map(|i| grad[(i, 0)].powi(2)).sum::<f64>().sqrt();
        if gnorm < opts.gradient_tol {
            converged = true;
            log.push(IterationLog { iteration: iterations, residual: norm, step_norm: 0.0 });
            break;
        }
        let step = jac.qr().solve_lstsq(&rvec);
        let theta = u.to_real_params();
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = theta.iter().enumerate().map(|(i, x)| x - t * step[(i, 0)]).collect();
            let cand = PotentialSpectrum::from_real_params(&trial)?;
            if let Ok((r2, n2)) = residual(&cand, target, m, opts.precision) {
                if n2 < norm {
                    accepted = Some((cand, r2, n2));
                    break;
                }
            }
            t *= 0.5;
        }
        let step_norm = t * (0..step.nrows()).map(|i| step[(i, 0)].powi(2)).sum::<f64>().sqrt();
        match accepted {
            Some((cand, r2, n2)) => {
                u = cand;
                res = r2;
                norm = n2;
                log.push(IterationLog { iteration: iterations, residual: norm, step_norm });
                converged = norm < opts.residual_tol;
            }
            None => {
                log.push(IterationLog { iteration: iterations, residual: norm, step_norm: 0.0 });
                break;
            }
        }
    }
    Ok(InverseResult { u, residual: norm, iterations, converged, log })
}
