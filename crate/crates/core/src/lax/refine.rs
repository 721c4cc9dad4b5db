//! One step of residual-based eigenpair correction for the low modes.
//!
//! Residuals `(A − λ) f` are formed with compensated sums, so gaps far below the
//! working-precision spacing of `λₙ ≈ n` stay resolvable.

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use super::LaxMatrix;
use crate::dd::Dd;

fn rayleigh_step(a: &LaxMatrix, n: usize, f: &[Complex64], offset: Dd) -> (Dd, Vec<Complex64>) {
    let r = a.shifted_residual(f, n as f64, offset);
    let num: f64 = f.iter().zip(&r).map(|(x, y)| (x.conj() * y).re).sum();
    let den: f64 = f.iter().map(|x| x.norm_sqr()).sum();
    (offset.add_f64(num / den), r)
}

pub(super) fn refine(
    a: &LaxMatrix,
    mut lambdas: Vec<f64>,
    mut vecs: Mat<Complex64>,
    k: usize,
) -> (Vec<f64>, Vec<Dd>, Mat<Complex64>) {
    let size = a.size();
    let cols = k + 1;
    let first: Vec<(Dd, Vec<Complex64>)> = (0..cols)
        .into_par_iter()
        .map(|n| {
            let f: Vec<Complex64> = vecs.col(n).iter().copied().collect();
            let start = Dd::new(lambdas[n]).add_f64(-(n as f64));
            rayleigh_step(a, n, &f, start)
        })
        .collect();

    let res = Mat::from_fn(size, cols, |i, j| first[j].1[i]);
    let coef = vecs.adjoint() * &res;
    let mut scaled = Mat::<Complex64>::zeros(size, cols);
    for n in 0..cols {
        let ln = n as f64 + first[n].0.to_f64();
        for m in 0..size {
            if m != n {
                scaled[(m, n)] = -coef[(m, n)] / (lambdas[m] - ln);
            }
        }
    }
    let delta = &vecs * &scaled;

    let second: Vec<(Dd, Vec<Complex64>)> = (0..cols)
        .into_par_iter()
        .map(|n| {
            let mut f: Vec<Complex64> = (0..size).map(|i| vecs[(i, n)] + delta[(i, n)]).collect();
            let norm = f.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            f.iter_mut().for_each(|x| *x /= norm);
            let (off, _) = rayleigh_step(a, n, &f, first[n].0);
            (off, f)
        })
        .collect();

    let mut offsets = Vec::with_capacity(cols);
    for (n, (off, f)) in second.into_iter().enumerate() {
        for (i, x) in f.into_iter().enumerate() {
            vecs[(i, n)] = x;
        }
        lambdas[n] = n as f64 + off.to_f64();
        offsets.push(off);
    }
    (lambdas, offsets, vecs)
}
