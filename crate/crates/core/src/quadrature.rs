//! Gauss–Jacobi rules from the Golub–Welsch eigenproblem.
//!
//! The Jacobi matrix is diagonalized by implicit QL sweeps that carry only the first
//! row of the eigenvector matrix, which is all the weights need.

use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Monic recurrence `(diagonal, off-diagonal)` for weight `(1−x)^α (1+x)^β` on `[-1, 1]`.
fn jacobi_recurrence(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = alpha + beta;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    diag.push((beta - alpha) / (ab + 2.0));
    for k in 1..n {
        let kf = k as f64;
        let t = 2.0 * kf + ab;
        diag.push((beta * beta - alpha * alpha) / (t * (t + 2.0)));
        let b2 = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (t * t * (t + 1.0) * (t - 1.0))
        };
        off.push(b2.sqrt());
    }
    (diag, off)
}

/// Eigenvalues of the symmetric tridiagonal matrix and the squared first components of
/// its normalized eigenvectors.
fn tridiagonal_first_row(mut d: Vec<f64>, off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = d.len();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Quadrature { order: n, change: f64::NAN });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok((
        order.iter().map(|&i| d[i]).collect(),
        order.iter().map(|&i| z[i] * z[i]).collect(),
    ))
}

/// `n`-point rule for `∫_{-1}^{1} (1−x)^α (1+x)^β f(x) dx`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<GaussRule> {
    let (nodes, z2) = jacobi_core(n, alpha, beta)?;
    let ln_mass = (alpha + beta + 1.0) * std::f64::consts::LN_2 + ln_beta(alpha + 1.0, beta + 1.0);
    let mass = ln_mass.exp();
    Ok(GaussRule { nodes, weights: z2.iter().map(|w| w * mass).collect() })
}

/// `n`-point rule for `∫₀¹ s^β (1−s)^α f(s) ds`, with weights scaled by `e^{ln_scale}`.
///
/// The scale lets callers fold large or tiny prefactors into the log-mass before
/// exponentiating.
pub fn gauss_jacobi_unit(n: usize, alpha: f64, beta: f64, ln_scale: f64) -> Result<GaussRule> {
    let (x, z2) = jacobi_core(n, alpha, beta)?;
    let mass = (ln_beta(beta + 1.0, alpha + 1.0) + ln_scale).exp();
    Ok(GaussRule {
        nodes: x.iter().map(|x| 0.5 * (1.0 + x)).collect(),
        weights: z2.iter().map(|w| w * mass).collect(),
    })
}

fn jacobi_core(n: usize, alpha: f64, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::invalid("quadrature order must be positive"));
    }
    if !(alpha > -1.0 && beta > -1.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::invalid(format!(
            "Jacobi exponents must exceed -1 (alpha = {alpha}, beta = {beta})"
        )));
    }
    let (d, off) = jacobi_recurrence(n, alpha, beta);
    tridiagonal_first_row(d, &off)
}
