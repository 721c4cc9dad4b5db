//! `ξ_q(t) = û(1)(t)` along the counterexample flow and its windowed integral
//! `|∫_I ξ_q(t) e^{−it(1−2μ_q)} dt|` against `√2 |I|`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{evolve_birkhoff_trajectory, BirkhoffFlowOptions, FlowTrajectory};
use crate::counterexample::{find_mu, CounterexampleParams, DEFAULT_BRACKET};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableOptions {
    pub t0: f64,
    pub t1: f64,
    /// Potential modes carried by the inverse; defaults to the decay rule. `M = 2 · modes`.
    pub modes: Option<usize>,
    /// Explicit sample times; defaults to [`observable_grid`].
    pub tgrid: Option<Vec<f64>>,
}

impl Default for ObservableOptions {
    fn default() -> Self {
        Self { t0: 0.0, t1: 1.0, modes: None, tgrid: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub mu_q: f64,
    pub times: Vec<f64>,
    pub xi: Vec<Complex64>,
    pub integral: Complex64,
    /// `√2 |I|`.
    pub target: f64,
    /// `|integral| / target`.
    pub ratio: f64,
    pub m: usize,
    /// Time at which the inverse stopped converging, if it did.
    pub truncated_at: Option<f64>,
}

/// Uniform grid on `[t0, t1]` on which the phase `t(1 − 2μ)` advances less than `π/8`
/// per step.
pub fn observable_grid(mu: f64, t0: f64, t1: f64) -> Result<Vec<f64>> {
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::invalid(format!("window [{t0}, {t1}] is empty")));
    }
    let rate = (1.0 - 2.0 * mu).abs().max(1.0);
    let max_step = std::f64::consts::FRAC_PI_8 / rate;
    let steps = ((t1 - t0) / max_step).floor() as usize + 1;
    Ok((0..=steps).map(|i| t0 + (t1 - t0) * i as f64 / steps as f64).collect())
}

/// `(t, û(1)(t))` along a trajectory.
pub fn sample_first_mode(traj: &FlowTrajectory) -> Vec<(f64, Complex64)> {
    traj.times.iter().zip(&traj.states).map(|(t, u)| (*t, u.coeff(1))).collect()
}

fn trapezoid(t: &[f64], f: &[Complex64]) -> Complex64 {
    t.windows(2)
        .zip(f.windows(2))
        .map(|(t, f)| (f[0] + f[1]) * (0.5 * (t[1] - t[0])))
        .sum()
}

/// Evolves `u_{0,q}` in Birkhoff coordinates and integrates `ξ_q e^{−it(1−2μ_q)}` over
/// the window.
pub fn weak_limit_observable(p: &CounterexampleParams, opts: &ObservableOptions) -> Result<WindowReport> {
    let search = find_mu(p, DEFAULT_BRACKET, 1e-12)?;
    let mu = search
        .mu
        .ok_or_else(|| Error::invalid(format!("no escaping eigenvalue: {}", search.diagnostic)))?;
    let times = match &opts.tgrid {
        Some(t) => {
            if t.len() < 2 || t.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("tgrid must be strictly increasing with two points"));
            }
            t.clone()
        }
        None => observable_grid(mu, opts.t0, opts.t1)?,
    };
    let modes = opts.modes.unwrap_or_else(|| p.decay_rule_m());
    let m = 2 * modes;
    let u0 = p.potential(modes)?;
    let traj = evolve_birkhoff_trajectory(&u0, &times, &BirkhoffFlowOptions::new(m))?;
    let samples = sample_first_mode(&traj);
    let t: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let xi: Vec<Complex64> = samples.iter().map(|s| s.1).collect();
    let w = 1.0 - 2.0 * mu;
    let integrand: Vec<Complex64> =
        t.iter().zip(&xi).map(|(t, x)| x * Complex64::from_polar(1.0, -w * t)).collect();
    let integral = trapezoid(&t, &integrand);
    let target = std::f64::consts::SQRT_2 * (times[times.len() - 1] - times[0]);
    Ok(WindowReport {
        mu_q: mu,
        times: t,
        xi,
        integral,
        target,
        ratio: integral.norm() / target,
        m,
        truncated_at: traj.truncated_at.map(|i| i.time),
    })
}
