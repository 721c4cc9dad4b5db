//! Benjamin–Ono time evolution: phase rotation in Birkhoff coordinates, and a direct
//! pseudo-spectral integrator used as an independent check.

mod direct;
mod observable;

pub use direct::{evolve_direct, evolve_direct_samples, BLOWUP_FACTOR};
pub use observable::{
    observable_grid, sample_first_mode, weak_limit_observable, ObservableOptions, WindowReport,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::birkhoff::{birkhoff_forward_with, birkhoff_inverse, InverseOptions, JacobianKind};
use crate::hardy::PotentialSpectrum;
use crate::lax::{Precision, GAP_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowMethod {
    Birkhoff,
    Direct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<PotentialSpectrum>,
    pub method: FlowMethod,
    /// Set when the Birkhoff inverse failed; `times`/`states` stop before this time.
    pub truncated_at: Option<TruncationInfo>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationInfo {
    pub time: f64,
    pub residual: f64,
}

/// `ωₙ = n² − 2 Σ_{k≤K} min(k, n) γₖ`, `n = 1..=K`.
pub fn frequencies(gammas: &[f64]) -> Result<Vec<f64>> {
    let mut g = Vec::with_capacity(gammas.len());
    for (i, &x) in gammas.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite("action"));
        }
        if x < -GAP_TOL {
            return Err(Error::NegativeGap { index: i + 1, gap: x });
        }
        g.push(x.max(0.0));
    }
    // Σ min(k,n)γₖ = Σ_{k≤n} kγₖ + n Σ_{k>n} γₖ
    let mut tail: f64 = g.iter().sum();
    let mut head = 0.0;
    Ok((1..=g.len())
        .map(|n| {
            head += n as f64 * g[n - 1];
            tail -= g[n - 1];
            let nf = n as f64;
            nf * nf - 2.0 * (head + nf * tail.max(0.0))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BirkhoffFlowOptions {
    /// Lax truncation.
    pub m: usize,
    /// Unknown potential modes in the inverse; defaults to `m / 2`.
    pub n_coords: Option<usize>,
    pub inverse: InverseOptions,
}

impl BirkhoffFlowOptions {
    /// Analytic Jacobian; arithmetic from [`Precision::auto`].
    pub fn new(m: usize) -> Self {
        Self {
            m,
            n_coords: None,
            inverse: InverseOptions {
                jacobian: JacobianKind::Analytic,
                precision: Precision::auto(m),
                ..Default::default()
            },
        }
    }

    fn coords(&self) -> usize {
        self.n_coords.unwrap_or(self.m / 2)
    }
}

fn rotate(zetas: &[Complex64], omegas: &[f64], t: f64) -> Vec<Complex64> {
    zetas.iter().zip(omegas).map(|(z, w)| z * Complex64::from_polar(1.0, w * t)).collect()
}

/// Single state at time `t` (any sign).
pub fn evolve_birkhoff(u0: &PotentialSpectrum, t: f64, m: usize) -> Result<PotentialSpectrum> {
    let traj = evolve_birkhoff_trajectory(u0, &[t], &BirkhoffFlowOptions::new(m))?;
    match traj.truncated_at {
        Some(info) => Err(Error::InverseNotConverged { residual: info.residual, iterations: 0 }),
        None => Ok(traj.states.into_iter().next().expect("one state")),
    }
}

/// States at each of `times`, each inverse warm-started from the previous state with its
/// modes advanced by the linear phases. Stops at the first inverse that does not converge.
pub fn evolve_birkhoff_trajectory(
    u0: &PotentialSpectrum,
    times: &[f64],
    opts: &BirkhoffFlowOptions,
) -> Result<FlowTrajectory> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("time"));
    }
    let n = opts.coords();
    if n == 0 || n > opts.m / 2 {
        return Err(Error::invalid(format!("{n} coordinates need 1 <= n <= M/2 = {}", opts.m / 2)));
    }
    if u0.n_max() > opts.m {
        return Err(Error::invalid(format!("{} modes exceed M = {}", u0.n_max(), opts.m)));
    }
    let z0 = birkhoff_forward_with(u0, opts.m, opts.inverse.precision)?;
    let omegas = frequencies(&z0.actions)?;
    let mut prev = (0.0, u0.resized(n)?);
    let mut out = FlowTrajectory {
        times: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
        method: FlowMethod::Birkhoff,
        truncated_at: None,
    };
    for &t in times {
        let target = rotate(&z0.zetas[..n], &omegas[..n], t);
        let dt = t - prev.0;
        let guess = PotentialSpectrum::new(
            prev.1
                .coeffs()
                .iter()
                .zip(&omegas)
                .map(|(c, w)| c * Complex64::from_polar(1.0, w * dt))
                .collect(),
        )?;
        let inv = InverseOptions { initial: Some(guess), ..opts.inverse.clone() };
        let res = birkhoff_inverse(&target, opts.m, &inv)?;
        if !res.converged {
            out.truncated_at = Some(TruncationInfo { time: t, residual: res.residual });
            break;
        }
        out.times.push(t);
        out.states.push(res.u.clone());
        prev = (t, res.u);
    }
    Ok(out)
}

/// Direct integration sampled at `times`.
pub fn evolve_direct_trajectory(
    u0: &PotentialSpectrum,
    times: &[f64],
    dt: f64,
    grid: usize,
) -> Result<FlowTrajectory> {
    let states = evolve_direct_samples(u0, times, dt, grid)?;
    Ok(FlowTrajectory { times: times.to_vec(), states, method: FlowMethod::Direct, truncated_at: None })
}
