//! Integrating-factor RK4 for `∂ₜu = ∂ₓ(|∂ₓ|u − u²)` on positive Fourier modes.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::hardy::PotentialSpectrum;
use crate::{Error, Result};

/// Relative growth of the `L²` norm treated as blow-up.
pub const BLOWUP_FACTOR: f64 = 1e6;

struct Stepper {
    grid: usize,
    modes: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
}

impl Stepper {
    fn new(grid: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            modes: grid / 3,
            fwd: planner.plan_fft_forward(grid),
            inv: planner.plan_fft_inverse(grid),
            buf: vec![Complex64::new(0.0, 0.0); grid],
        }
    }

    /// `−ik (u²)^(k)` for `k = 1..=modes`, everything above the 2/3 cutoff dropped.
    fn nonlinear(&mut self, v: &[Complex64], out: &mut [Complex64]) {
        let g = self.grid;
        self.buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        for (i, c) in v.iter().enumerate() {
            self.buf[i + 1] = *c;
            self.buf[g - i - 1] = c.conj();
        }
        self.inv.process(&mut self.buf);
        for b in self.buf.iter_mut() {
            *b = Complex64::new(b.re * b.re, 0.0);
        }
        self.fwd.process(&mut self.buf);
        let scale = 1.0 / g as f64;
        for (k, o) in out.iter_mut().enumerate() {
            let kk = (k + 1) as f64;
            *o = Complex64::new(0.0, -kk) * self.buf[k + 1] * scale;
        }
    }
}

fn l2(v: &[Complex64]) -> f64 {
    (2.0 * v.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
}

/// Integrates from `u0` and returns the states at each requested time (ascending,
/// nonnegative). Steps are at most `dt`, shortened so that every sample time is hit.
pub fn evolve_direct_samples(
    u0: &PotentialSpectrum,
    times: &[f64],
    dt: f64,
    grid: usize,
) -> Result<Vec<PotentialSpectrum>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("time step {dt} must be positive")));
    }
    if grid < 4 * u0.n_max() {
        return Err(Error::invalid(format!(
            "grid {grid} is below 4 n_max = {}",
            4 * u0.n_max()
        )));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("sample times must be finite, nonnegative and ascending"));
    }
    let mut st = Stepper::new(grid);
    let modes = st.modes;
    let mut v: Vec<Complex64> = (1..=modes as i64).map(|k| u0.coeff(k)).collect();
    let norm0 = l2(&v);
    let mut a = vec![Complex64::new(0.0, 0.0); modes];
    let mut b = a.clone();
    let mut c = a.clone();
    let mut d = a.clone();
    let mut tmp = a.clone();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - now;
        let steps = (span / dt).ceil().max(if span > 0.0 { 1.0 } else { 0.0 }) as usize;
        if steps > 0 {
            let h = span / steps as f64;
            let e1: Vec<Complex64> = (1..=modes)
                .map(|k| Complex64::from_polar(1.0, (k * k) as f64 * h / 2.0))
                .collect();
            for step in 0..steps {
                st.nonlinear(&v, &mut a);
                for k in 0..modes {
                    tmp[k] = e1[k] * (v[k] + a[k] * (h / 2.0));
                }
                st.nonlinear(&tmp, &mut b);
                for k in 0..modes {
                    tmp[k] = e1[k] * v[k] + b[k] * (h / 2.0);
                }
                st.nonlinear(&tmp, &mut c);
                for k in 0..modes {
                    let e2 = e1[k] * e1[k];
                    tmp[k] = e2 * v[k] + e1[k] * c[k] * h;
                }
                st.nonlinear(&tmp, &mut d);
                for k in 0..modes {
                    let e2 = e1[k] * e1[k];
                    v[k] = e2 * v[k] + (e2 * a[k] + e1[k] * (b[k] + c[k]) * 2.0 + d[k]) * (h / 6.0);
                }
                let n = l2(&v);
                if !n.is_finite() || n > BLOWUP_FACTOR * norm0.max(f64::MIN_POSITIVE) {
                    return Err(Error::BlowUp { time: now + (step + 1) as f64 * h, norm: n });
                }
            }
        }
        now = target;
        out.push(PotentialSpectrum::new(v.clone())?);
    }
    Ok(out)
}

/// State at time `t` on a `grid`-point mesh; the result carries `grid / 3` modes.
pub fn evolve_direct(u0: &PotentialSpectrum, t: f64, dt: f64, grid: usize) -> Result<PotentialSpectrum> {
    Ok(evolve_direct_samples(u0, &[t], dt, grid)?.remove(0))
}
