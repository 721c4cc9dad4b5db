//! Derivatives of `(Re ζₙ, Im ζₙ)_{n≤N}` with respect to `(Re û(k), Im û(k))_{k≤P}`.
//!
//! Row `2(n−1)` holds `∂ Re ζₙ`, row `2(n−1)+1` holds `∂ Im ζₙ`; column `2(k−1)` is the
//! derivative along `Re û(k)` and `2(k−1)+1` along `Im û(k)`.

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::{birkhoff_forward_with, birkhoff_from_spectral};
use crate::hardy::PotentialSpectrum;
use crate::lax::{assemble_lax_matrix, eigendecompose_with, Precision, SpectralData};
use crate::{Error, Result};

fn check_sizes(u: &PotentialSpectrum, m: usize, n_coords: usize) -> Result<()> {
    if n_coords == 0 {
        return Err(Error::invalid("need at least one Birkhoff coordinate"));
    }
    if n_coords > m / 2 {
        return Err(Error::invalid(format!(
            "{n_coords} coordinates need M >= {}, got M = {m}",
            2 * n_coords
        )));
    }
    if u.n_max() > m {
        return Err(Error::invalid(format!(
            "{} potential modes exceed the Lax truncation M = {m}",
            u.n_max()
        )));
    }
    Ok(())
}

fn stack(zetas: &[Complex64]) -> Vec<f64> {
    zetas.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Forward differences with step `max(1e−6 |θ_j|, 1e−8)`.
pub fn forward_difference_jacobian(
    u: &PotentialSpectrum,
    m: usize,
    n_coords: usize,
) -> Result<(Vec<Complex64>, Mat<f64>)> {
    forward_difference_jacobian_with(u, m, n_coords, Precision::Compensated)
}

pub fn forward_difference_jacobian_with(
    u: &PotentialSpectrum,
    m: usize,
    n_coords: usize,
    precision: Precision,
) -> Result<(Vec<Complex64>, Mat<f64>)> {
    check_sizes(u, m, n_coords)?;
    let base = birkhoff_forward_with(u, m, precision)?.zetas[..n_coords].to_vec();
    let y0 = stack(&base);
    let theta = u.to_real_params();
    let cols: Vec<Vec<f64>> = (0..theta.len())
        .into_par_iter()
        .map(|j| {
            let h = (1e-6 * theta[j].abs()).max(1e-8);
            let mut t = theta.clone();
            t[j] += h;
            let up = PotentialSpectrum::from_real_params(&t)?;
            let y = stack(&birkhoff_forward_with(&up, m, precision)?.zetas[..n_coords]);
            Ok(y.iter().zip(&y0).map(|(a, b)| (a - b) / h).collect())
        })
        .collect::<Result<_>>()?;
    let jac = Mat::from_fn(2 * n_coords, theta.len(), |i, j| cols[j][i]);
    Ok((base, jac))
}

struct Correlator {
    len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    params: usize,
}

impl Correlator {
    fn new(size: usize, params: usize) -> Self {
        let len = (2 * size).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            len,
            fwd: planner.plan_fft_forward(len),
            inv: planner.plan_fft_inverse(len),
            params,
        }
    }

    fn transform(&self, x: impl Iterator<Item = Complex64>) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for (b, v) in buf.iter_mut().zip(x) {
            *b = v;
        }
        self.fwd.process(&mut buf);
        buf
    }

    /// `h^H (∂A) f` for every real parameter, from the transforms of `h` and `f`.
    ///
    /// With `c(ℓ) = Σ_m conj(h_m) f_{m−ℓ}`: along `Re û(k)` the value is `−c(k) − c(−k)`,
    /// along `Im û(k)` it is `−i c(k) + i c(−k)`.
    fn derivative(&self, h_hat: &[Complex64], f_hat: &[Complex64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = h_hat.iter().zip(f_hat).map(|(a, b)| a.conj() * b).collect();
        self.inv.process(&mut buf);
        let scale = 1.0 / self.len as f64;
        let c = |l: i64| buf[l.rem_euclid(self.len as i64) as usize] * scale;
        let i = Complex64::new(0.0, 1.0);
        let mut out = Vec::with_capacity(2 * self.params);
        for k in 1..=self.params as i64 {
            let (cp, cm) = (c(-k), c(k));
            out.push(-cp - cm);
            out.push(-i * cp + i * cm);
        }
        out
    }
}

/// Exact derivative of the truncated map from first-order perturbation theory of the
/// Lax eigenpairs, including the phase-normalization and norming-constant terms.
pub fn birkhoff_jacobian(
    u: &PotentialSpectrum,
    m: usize,
    n_coords: usize,
) -> Result<(Vec<Complex64>, Mat<f64>)> {
    birkhoff_jacobian_with(u, m, n_coords, Precision::Compensated)
}

pub fn birkhoff_jacobian_with(
    u: &PotentialSpectrum,
    m: usize,
    n_coords: usize,
    precision: Precision,
) -> Result<(Vec<Complex64>, Mat<f64>)> {
    check_sizes(u, m, n_coords)?;
    let sd = eigendecompose_with(&assemble_lax_matrix(u, m)?, precision)?;
    let coords = birkhoff_from_spectral(&sd)?;
    let jac = jacobian_from_spectral(&sd, &coords.kappas, u.n_max(), n_coords);
    Ok((coords.zetas[..n_coords].to_vec(), jac))
}

fn jacobian_from_spectral(sd: &SpectralData, kappas: &[f64], params: usize, n_coords: usize) -> Mat<f64> {
    let size = sd.m() + 1;
    let k = sd.reliable_count();
    let nn = n_coords;
    let f = sd.eigvecs();
    let r: Vec<Complex64> = (0..size).map(|j| f[(0, j)]).collect();
    let diff = |a: usize, b: usize| sd.lambda_diff(a, b);

    // B = (S F)^H F
    let sf = Mat::from_fn(size, size, |i, j| if i == 0 { Complex64::new(0.0, 0.0) } else { f[(i - 1, j)] });
    let b = sf.adjoint() * f;

    let wg = Mat::from_fn(size, nn + 1, |mm, n| {
        if mm == n { Complex64::new(0.0, 0.0) } else { r[mm].conj() / diff(n, mm) }
    });
    let wq = Mat::from_fn(size, nn, |mm, c| {
        let n = c + 1;
        if mm == n { Complex64::new(0.0, 0.0) } else { b[(n - 1, mm)].conj() / diff(n, mm) }
    });
    let ws = Mat::from_fn(size, nn, |mm, c| {
        let n = c + 1;
        if mm == n - 1 { Complex64::new(0.0, 0.0) } else { b[(mm, n)] / diff(n - 1, mm) }
    });
    let g = f * &wg;
    let q = f * &wq;
    let s = f * &ws;

    let corr = Correlator::new(size, params);
    let col = |mat: &Mat<Complex64>, j: usize| corr.transform((0..size).map(move |i| mat[(i, j)]));
    let f_hat: Vec<Vec<Complex64>> = (0..=k.max(nn)).into_par_iter().map(|j| col(f, j)).collect();

    let dlam: Vec<Vec<f64>> = (0..=k)
        .into_par_iter()
        .map(|p| corr.derivative(&f_hat[p], &f_hat[p]).iter().map(|z| z.re).collect())
        .collect();
    let a: Vec<Vec<Complex64>> = (0..=nn)
        .into_par_iter()
        .map(|n| corr.derivative(&col(&g, n), &f_hat[n]))
        .collect();
    let phase_terms: Vec<Vec<f64>> = (1..=nn)
        .into_par_iter()
        .map(|n| {
            let t1 = corr.derivative(&col(&q, n - 1), &f_hat[n]);
            let t2 = corr.derivative(&col(&s, n - 1), &f_hat[n - 1]);
            let p_n = b[(n - 1, n)].re;
            t1.iter().zip(&t2).map(|(x, y)| (x + y.conj()).im / p_n).collect()
        })
        .collect();

    let np = 2 * params;
    let mut phi: Vec<f64> = a[0].iter().map(|z| -z.im / r[0].re).collect();
    let mut jac = Mat::<f64>::zeros(2 * nn, np);
    for n in 1..=nn {
        for j in 0..np {
            phi[j] -= phase_terms[n - 1][j];
        }
        // d log κₙ
        let mut dlk: Vec<f64> = (0..np)
            .map(|j| -(dlam[n][j] - dlam[0][j]) / diff(n, 0))
            .collect();
        for p in 1..=k {
            if p == n {
                continue;
            }
            let d1 = diff(p - 1, n) + 1.0;
            let d2 = diff(p, n);
            for j in 0..np {
                dlk[j] += (dlam[p - 1][j] - dlam[n][j]) / d1 - (dlam[p][j] - dlam[n][j]) / d2;
            }
        }
        let sk = kappas[n].sqrt();
        let zeta = r[n].conj() / sk;
        for j in 0..np {
            let dr = a[n][j] + Complex64::new(0.0, phi[j]) * r[n];
            let dz = dr.conj() / sk - zeta * (0.5 * dlk[j]);
            jac[(2 * (n - 1), j)] = dz.re;
            jac[(2 * (n - 1) + 1, j)] = dz.im;
        }
    }
    jac
}
