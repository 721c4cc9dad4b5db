//! Reference computations shared by the integration tests. Nothing here calls into the
//! library code it is used to check.

#![allow(dead_code)]

use bo_birkhoff::{Complex64, PotentialSpectrum};
use faer::{Mat, Side};

/// Prints one verdict line and returns whether it passed.
pub fn verdict(criterion: &str, pass: bool, detail: impl std::fmt::Display) -> bool {
    println!("{}: {criterion}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

/// Neumaier-compensated sum.
pub fn ksum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

/// `A(m, n) = m δ_{mn} − û(m − n)` assembled entry by entry on modes `0..=m`.
pub fn dense_lax(u: &PotentialSpectrum, m: usize) -> Mat<Complex64> {
    let c = |k: i64| -> Complex64 {
        if k == 0 || k.unsigned_abs() as usize > u.n_max() {
            Complex64::new(0.0, 0.0)
        } else if k > 0 {
            u.coeffs()[k as usize - 1]
        } else {
            u.coeffs()[(-k) as usize - 1].conj()
        }
    };
    Mat::from_fn(m + 1, m + 1, |i, j| {
        let d = if i == j { i as f64 } else { 0.0 };
        Complex64::new(d, 0.0) - c(i as i64 - j as i64)
    })
}

/// Ascending eigenvalues and eigenvectors straight from the dense Hermitian solver.
pub fn dense_eigen(u: &PotentialSpectrum, m: usize) -> (Vec<f64>, Mat<Complex64>) {
    let evd = dense_lax(u, m).self_adjoint_eigen(Side::Lower).expect("eigensolver");
    let s = evd.S().column_vector();
    let n = m + 1;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].re.total_cmp(&s[b].re));
    let vals = order.iter().map(|&i| s[i].re).collect();
    let vecs = Mat::from_fn(n, n, |i, j| evd.U()[(i, order[j])]);
    (vals, vecs)
}

pub fn dense_eigenvalues(u: &PotentialSpectrum, m: usize) -> Vec<f64> {
    let mut v: Vec<f64> = dense_lax(u, m)
        .self_adjoint_eigenvalues(Side::Lower)
        .expect("eigensolver");
    v.sort_by(f64::total_cmp);
    v
}

// Gauss–Kronrod 7/15 on [-1, 1].
const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XK[i];
        let s = f(c - x) + f(c + x);
        k += WK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive bisection of `[a, b]` until each panel's Kronrod–Gauss difference is below
/// `tol` times the running estimate.
pub fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut panels = vec![(a, b, gk15(f, a, b))];
    for _ in 0..200_000 {
        let total: f64 = panels.iter().map(|p| p.2 .0).sum();
        let (idx, worst) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .map(|(i, p)| (i, p.2 .1))
            .unwrap();
        let err: f64 = panels.iter().map(|p| p.2 .1).sum();
        if err <= tol * total.abs() || worst == 0.0 {
            return ksum(panels.iter().map(|p| p.2 .0));
        }
        let (lo, hi, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        panels.push((lo, mid, gk15(f, lo, mid)));
        panels.push((mid, hi, gk15(f, mid, hi)));
    }
    panic!("adaptive quadrature did not converge");
}

/// `∫₀¹ s^p (1−q²s)^r (1−s)^{−e} ds`, split at `1/2`: `s = v^{1/(p+1)}` absorbs the left
/// endpoint, `w = (1−s)^{1−e}` the right one.
pub fn singular_integral(p: f64, r: f64, e: f64, q: f64, tol: f64) -> f64 {
    let q2 = q * q;
    let a = p + 1.0;
    let left = |v: f64| -> f64 {
        let s = v.powf(1.0 / a);
        (1.0 - q2 * s).powf(r) * (1.0 - s).powf(-e) / a
    };
    let right = |w: f64| -> f64 {
        let t = w.powf(1.0 / (1.0 - e));
        let s = 1.0 - t;
        s.powf(p) * (1.0 - q2 * s).powf(r) / (1.0 - e)
    };
    let vmax = 0.5f64.powf(a);
    let wmax = 0.5f64.powf(1.0 - e);
    adaptive(&left, 0.0, vmax, tol) + adaptive(&right, 0.0, wmax, tol)
}

/// `(F₊, F₋)` from the raw integrals after `t = qs`.
pub fn f_oracle(mu: f64, eps: f64, q: f64) -> (f64, f64) {
    let plus = mu * q.powf(mu) * singular_integral(eps + mu - 1.0, eps, eps, q, 1e-14);
    let minus = eps * q.powf(mu + 2.0) * singular_integral(eps + mu, eps - 1.0, eps, q, 1e-14);
    (plus, minus)
}

/// Plain bisection for the zero of `F₊ − F₋` on a bracket with a sign change.
pub fn mu_oracle(eps: f64, q: f64, mut lo: f64, mut hi: f64) -> f64 {
    let f = |m: f64| {
        let (a, b) = f_oracle(m, eps, q);
        a - b
    };
    let mut flo = f(lo);
    assert!((flo < 0.0) != (f(hi) < 0.0), "no sign change on [{lo}, {hi}]");
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `u(t)` samples of a potential on an `n`-point grid by direct trigonometric summation.
pub fn grid_values(u: &PotentialSpectrum, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let x = std::f64::consts::TAU * j as f64 / n as f64;
            2.0 * ksum(u.coeffs().iter().enumerate().map(|(i, c)| {
                let k = (i + 1) as f64;
                c.re * (k * x).cos() - c.im * (k * x).sin()
            }))
        })
        .collect()
}

/// Random smooth potentials `|û(n)| = s n^{−2}` with seeded phases, rescaled so that
/// `‖u‖_{L²} = norm`.
pub fn smooth_ensemble(count: usize, n_max: usize, norm: f64, seed: u64) -> Vec<PotentialSpectrum> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let c: Vec<Complex64> = (1..=n_max)
                .map(|k| Complex64::from_polar((k as f64).powi(-2), rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            let l2 = (2.0 * c.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
            PotentialSpectrum::new(c.into_iter().map(|z| z * (norm / l2)).collect()).unwrap()
        })
        .collect()
}

/// Eigenvalues of a real-coefficient potential's matrix through the real symmetric path.
pub fn dense_eigenvalues_real(u: &PotentialSpectrum, m: usize) -> Vec<f64> {
    assert!(u.coeffs().iter().all(|c| c.im == 0.0));
    let c = |k: usize| if k == 0 || k > u.n_max() { 0.0 } else { u.coeffs()[k - 1].re };
    let a = Mat::from_fn(m + 1, m + 1, |i, j| {
        let d = if i == j { i as f64 } else { 0.0 };
        d - c(i.abs_diff(j))
    });
    let mut v: Vec<f64> = a.self_adjoint_eigenvalues(Side::Lower).expect("eigensolver");
    v.sort_by(f64::total_cmp);
    v
}

/// `‖u‖²_{−1/2,√log} = 2 Σ log(n+1)/n |û(n)|²`.
pub fn phase_norm(u: &PotentialSpectrum) -> f64 {
    ksum(u.coeffs().iter().enumerate().map(|(i, c)| {
        let n = (i + 1) as f64;
        2.0 * (n + 1.0).ln() / n * c.norm_sqr()
    }))
    .sqrt()
}
