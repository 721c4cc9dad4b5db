use super::*;
use crate::hardy::{make_potential, PotentialFamily};
use proptest::prelude::*;

fn cosine(a: f64, n: usize) -> PotentialSpectrum {
    make_potential(&PotentialFamily::Cosine { amplitude: a }, n).unwrap()
}

fn random(seed: u64, decay: f64, scale: f64, n: usize) -> PotentialSpectrum {
    make_potential(&PotentialFamily::Random { seed, decay, scale }, n).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn assemble_zero_is_number_operator() {
    let a = assemble_lax_matrix(&PotentialSpectrum::zeros(3).unwrap(), 3).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let expected = if i == j { i as f64 } else { 0.0 };
            assert_eq!(a.entry(i, j), c(expected, 0.0));
        }
    }
}

#[test]
fn assemble_cosine() {
    let a = assemble_lax_matrix(&cosine(1.0, 4), 2).unwrap();
    let d = a.to_dense();
    for i in 0..3 {
        for j in 0..3 {
            let expected = match (i as i64 - j as i64).abs() {
                0 => i as f64,
                1 => -0.5,
                _ => 0.0,
            };
            assert_eq!(d[(i, j)], c(expected, 0.0));
        }
    }
}

#[test]
fn assemble_counterexample() {
    let u = make_potential(&PotentialFamily::Counterexample { beta: 2.0, q: 0.9 }, 8).unwrap();
    let a = assemble_lax_matrix(&u, 2).unwrap();
    let eps = 2.0 / 0.1f64.ln().abs();
    for i in 0..3usize {
        for j in 0..3usize {
            if i != j {
                let expected = -eps * 0.9f64.powi((i as i32 - j as i32).abs());
                assert!((a.entry(i, j).re - expected).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn assemble_rejects_zero_size() {
    assert!(assemble_lax_matrix(&cosine(1.0, 2), 0).is_err());
}

#[test]
fn apply_matches_dense() {
    let u = random(2, 1.0, 0.3, 10);
    let a = assemble_lax_matrix(&u, 16).unwrap();
    let x: Vec<Complex64> = (0..17).map(|i| c(i as f64 * 0.1, 1.0 - i as f64 * 0.05)).collect();
    let y = a.apply(&x);
    let d = a.to_dense();
    for i in 0..17 {
        let z: Complex64 = (0..17).map(|j| d[(i, j)] * x[j]).sum();
        assert!((z - y[i]).norm() < 1e-13);
    }
    let r = a.shifted_residual(&x, 3.0, Dd::new(0.25));
    for i in 0..17 {
        assert!((r[i] - (y[i] - x[i] * 3.25)).norm() < 1e-13);
    }
}

#[test]
fn free_spectrum() {
    let a = assemble_lax_matrix(&PotentialSpectrum::zeros(8).unwrap(), 16).unwrap();
    let sd = eigendecompose(&a).unwrap();
    assert_eq!(sd.reliable_count(), 8);
    for n in 0..=16 {
        assert_eq!(sd.lambda(n), n as f64);
        for i in 0..=16 {
            let expected = if i == n { 1.0 } else { 0.0 };
            assert!((sd.eigvecs()[(i, n)] - c(expected, 0.0)).norm() < 1e-15);
        }
        let e = if n == 0 { 1.0 } else { 0.0 };
        assert!((sd.inner1()[n] - c(e, 0.0)).norm() < 1e-15);
    }
    assert!(sd.gaps().iter().all(|&g| g == 0.0));
    let (_, r) = gaps_and_trace(&sd);
    assert_eq!(r, 0.0);
}

#[test]
fn refinement_stable_under_doubling() {
    let u = cosine(0.2, 1);
    let s1 = eigendecompose(&assemble_lax_matrix(&u, 128).unwrap()).unwrap();
    let s2 = eigendecompose(&assemble_lax_matrix(&u, 256).unwrap()).unwrap();
    assert!(s1.lambda(0) < 0.0);
    for n in 0..=64 {
        assert!((s1.lambda(n) - s2.lambda(n)).abs() <= 1e-8, "n = {n}");
    }
}

#[test]
fn orthonormal_columns() {
    let u = random(9, 1.0, 0.5, 32);
    let sd = eigendecompose(&assemble_lax_matrix(&u, 64).unwrap()).unwrap();
    let f = sd.eigvecs();
    let g = f.adjoint() * f;
    for i in 0..65 {
        for j in 0..65 {
            let e = if i == j { 1.0 } else { 0.0 };
            assert!((g[(i, j)] - c(e, 0.0)).norm() < 1e-10, "({i},{j})");
        }
    }
}

#[test]
fn eigenvalues_only_agrees() {
    let u = random(4, 1.5, 0.4, 20);
    let a = assemble_lax_matrix(&u, 40).unwrap();
    let ev = eigenvalues(&a).unwrap();
    let sd = eigendecompose(&a).unwrap();
    for (x, y) in ev.iter().zip(sd.lambdas()) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn refined_pairs_have_tiny_residuals() {
    let u = random(5, 2.0, 0.5, 32);
    let a = assemble_lax_matrix(&u, 64).unwrap();
    let sd = eigendecompose(&a).unwrap();
    for n in 0..=sd.reliable_count() {
        let f = sd.eigvec(n);
        let r = a.shifted_residual(&f, n as f64, Dd::new(sd.offset(n)));
        let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(norm < 1e-15, "n = {n}: {norm:e}");
    }
}

#[test]
fn phases_are_normalized_and_idempotent() {
    let u = random(7, 1.0, 0.4, 24);
    let sd = eigendecompose(&assemble_lax_matrix(&u, 48).unwrap()).unwrap();
    let f0 = sd.eigvecs()[(0, 0)];
    assert!(f0.im.abs() < 1e-12 && f0.re > 0.0);
    for n in 1..=sd.reliable_count() {
        let s = shift(&sd.eigvec(n - 1));
        let p: Complex64 = sd.eigvec(n).iter().zip(&s).map(|(a, b)| a * b.conj()).sum();
        assert!(p.im.abs() < 1e-12 && p.re > 0.0, "n = {n}: {p}");
    }
    let again = normalize_phases(sd.clone()).unwrap();
    for n in 0..=48 {
        for i in 0..=48 {
            assert!((again.eigvecs()[(i, n)] - sd.eigvecs()[(i, n)]).norm() < 1e-14);
        }
    }
}

#[test]
fn trace_formula_for_small_cosine() {
    let sd = eigendecompose(&assemble_lax_matrix(&cosine(0.2, 1), 256).unwrap()).unwrap();
    let (gaps, r) = gaps_and_trace(&sd);
    assert_eq!(gaps.len(), 256);
    assert!(r <= 1e-6, "{r:e}");
    assert!(trace_residual(&sd) <= 1e-6);
}

#[test]
fn gap_decay_is_geometric_for_smooth_input() {
    let u = make_potential(&PotentialFamily::Counterexample { beta: 0.3, q: 0.5 }, 64).unwrap();
    let sd = eigendecompose(&assemble_lax_matrix(&u, 128).unwrap()).unwrap();
    let pts: Vec<(f64, f64)> = (1..=sd.reliable_count())
        .filter(|&n| sd.gap(n) > 1e-25)
        .map(|n| (n as f64, sd.gap(n).ln()))
        .collect();
    assert!(pts.len() >= 5);
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let rho = slope.exp();
    assert!(rho < 1.0, "rho = {rho}");
    for (n, lg) in &pts {
        assert!(*lg <= sd.gap(1).ln() + 1e-12, "gap {n} exceeds gap 1");
    }
}

#[test]
fn resolvent_free_values() {
    let z = PotentialSpectrum::zeros(4).unwrap();
    assert!((resolvent_form(&z, 1.0, 8).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    assert!((resolvent_form(&z, 2.5, 8).unwrap() - c(0.4, 0.0)).norm() < 1e-15);
    assert!(matches!(
        resolvent_form(&z, -3.0, 8),
        Err(Error::NearSingular { index: 3, .. })
    ));
}

#[test]
fn resolvent_matches_eigen_expansion() {
    let u = random(3, 1.0, 0.5, 16);
    let a = assemble_lax_matrix(&u, 32).unwrap();
    let sd = eigendecompose(&a).unwrap();
    let lam = -sd.lambda(0) + 2.0;
    let g = resolvent_form(&u, lam, 32).unwrap();
    let expansion: f64 = (0..=32)
        .map(|n| sd.inner1()[n].norm_sqr() / (sd.lambda(n) + lam))
        .sum();
    assert!((g.re - expansion).abs() < 1e-10);
    assert!(g.im.abs() < 1e-12);
}

#[test]
fn collisions_are_reported() {
    assert!(matches!(
        check_collisions(&[0.0, 1.0, 1.0 + 1e-12]),
        Err(Error::EigenvalueCollision { index: 2, .. })
    ));
    assert!(check_collisions(&[0.0, 1.0, 2.0]).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectral_bounds_and_gaps(seed in 0u64..10_000, scale in 0.0f64..0.8) {
        let u = random(seed, 1.5, scale, 16);
        let a = assemble_lax_matrix(&u, 48).unwrap();
        prop_assert!((0..49).all(|i| (0..49).all(|j| a.entry(i, j) == a.entry(j, i).conj())));
        let sd = eigendecompose(&a).unwrap();
        let l0 = sd.lambda(0);
        for n in 1..=sd.reliable_count() {
            let off = sd.offset(n);
            prop_assert!(off <= 1e-6 && off >= l0 - 1e-6, "n = {}", n);
            prop_assert!(sd.gap(n) >= -GAP_TOL);
        }
        prop_assert!(sd.lambdas().windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn standard_precision_matches_compensated_to_working_precision() {
    let u = make_potential(&PotentialFamily::Random { seed: 4, decay: 2.0, scale: 0.5 }, 12).unwrap();
    let a = assemble_lax_matrix(&u, 48).unwrap();
    let c = eigendecompose_with(&a, Precision::Compensated).unwrap();
    let s = eigendecompose_with(&a, Precision::Standard).unwrap();
    for n in 0..=24 {
        assert!((c.lambda(n) - s.lambda(n)).abs() < 1e-12);
        assert!((c.inner1()[n] - s.inner1()[n]).norm() < 1e-12);
    }
    assert_eq!(Precision::auto(256), Precision::Compensated);
    assert_eq!(Precision::auto(512), Precision::Standard);
}
