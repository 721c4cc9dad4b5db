//! Truncated Fourier and Hardy-space representations, log-weighted Sobolev norms and
//! Toeplitz products.
//!
//! A real mean-zero potential is stored by its positive-frequency half
//! `û(1), ..., û(n_max)`; the negative half is the complex conjugate and `û(0) = 0`.
//! Hardy functions carry modes `0..=n_max` and nothing below zero.

mod dyadic;
mod probe;
mod sequence;

pub use dyadic::{cutoff, dyadic_decompose, dyadic_norm_sq, dyadic_partition_sum, DyadicBlock};
pub use probe::{bilinear_constant_probe, EnsembleSpec, ProbeReport, RatioSummary};
pub use sequence::{
    a_sequence, divergence_witness, obstruction_witness, obstruction_x, q_form, q_form_fft,
    DivergenceReport, ObstructionRow,
};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `⟨n⟩ = max(1, |n|)`.
#[inline]
pub fn bracket(n: i64) -> f64 {
    n.unsigned_abs().max(1) as f64
}

fn check_finite(coeffs: &[Complex64], what: &'static str) -> Result<()> {
    if coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Fourier coefficients of a real, mean-zero periodic potential truncated at `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpectrum {
    coeffs: Vec<Complex64>,
}

impl PotentialSpectrum {
    /// `coeffs[k - 1]` is `û(k)`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("potential needs n_max >= 1"));
        }
        check_finite(&coeffs, "potential coefficients")?;
        Ok(Self { coeffs })
    }

    pub fn zeros(n_max: usize) -> Result<Self> {
        Self::new(vec![ZERO; n_max])
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `û(k)` for any integer `k`, using `û(-k) = conj(û(k))`, `û(0) = 0` and zero
    /// beyond the truncation.
    #[inline]
    pub fn coeff(&self, k: i64) -> Complex64 {
        let idx = k.unsigned_abs() as usize;
        if idx == 0 || idx > self.coeffs.len() {
            ZERO
        } else if k > 0 {
            self.coeffs[idx - 1]
        } else {
            self.coeffs[idx - 1].conj()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm_sqr() == 0.0)
    }

    /// Zero-padded or truncated copy with `n_max` modes.
    pub fn resized(&self, n_max: usize) -> Result<Self> {
        let mut c = self.coeffs.clone();
        c.resize(n_max, ZERO);
        Self::new(c)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// The translate `x ↦ u(x + θ)`.
    pub fn shifted(&self, theta: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::from_polar(1.0, (i + 1) as f64 * theta))
            .collect();
        Self { coeffs }
    }

    /// Values of `u` on an `n`-point uniform grid (`n > 2 n_max`).
    pub fn grid_samples(&self, n: usize) -> Vec<Complex64> {
        grid::synthesize(self.n_max(), n, |k| self.coeff(k))
    }

    /// `‖u‖_{L²}` with the normalized measure `dx / 2π`.
    pub fn l2_norm(&self) -> f64 {
        (2.0 * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `‖u - v‖_{L²}` over the union of the represented modes.
    pub fn l2_distance(&self, other: &Self) -> f64 {
        self.difference(other).l2_norm()
    }

    /// `u - v`, padded to the larger truncation.
    pub fn difference(&self, other: &Self) -> Self {
        let n = self.n_max().max(other.n_max());
        let coeffs = (1..=n as i64)
            .map(|k| self.coeff(k) - other.coeff(k))
            .collect();
        Self { coeffs }
    }

    /// Real parameter vector `[Re û(1), Im û(1), Re û(2), ...]`.
    pub fn to_real_params(&self) -> Vec<f64> {
        self.coeffs.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn from_real_params(params: &[f64]) -> Result<Self> {
        if params.len() % 2 != 0 {
            return Err(Error::invalid("real parameter vector must have even length"));
        }
        Self::new(
            params
                .chunks_exact(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect(),
        )
    }
}

/// On-disk form: `{"n_max": M, "coeffs": [[re, im], ...]}` listing `û(1)..û(M)`.
#[derive(Debug, Serialize, Deserialize)]
struct PotentialJson {
    n_max: usize,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for PotentialSpectrum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PotentialJson {
            n_max: self.n_max(),
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PotentialSpectrum {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PotentialJson::deserialize(d)?;
        if raw.coeffs.len() != raw.n_max {
            return Err(serde::de::Error::custom(format!(
                "n_max = {} but {} coefficients given",
                raw.n_max,
                raw.coeffs.len()
            )));
        }
        PotentialSpectrum::new(raw.coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// Element of the Hardy space: modes `f̂(0)..f̂(n_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HardyFunction {
    coeffs: Vec<Complex64>,
}

impl HardyFunction {
    /// `coeffs[k]` is `f̂(k)`; `n_max = coeffs.len() - 1`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("Hardy function needs at least the zero mode"));
        }
        check_finite(&coeffs, "Hardy coefficients")?;
        Ok(Self { coeffs })
    }

    pub fn zeros(n_max: usize) -> Self {
        Self {
            coeffs: vec![ZERO; n_max + 1],
        }
    }

    /// `e^{ikx}` truncated at `n_max`.
    pub fn mode(k: usize, n_max: usize) -> Self {
        let mut f = Self::zeros(n_max.max(k));
        f.coeffs[k] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k < 0 {
            ZERO
        } else {
            self.coeffs.get(k as usize).copied().unwrap_or(ZERO)
        }
    }

    /// `⟨f|g⟩ = Σ f̂(k) conj(ĝ(k))`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum()
    }
}

/// Which logarithmic factor multiplies the Sobolev weight `⟨n⟩^{2s}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogMode {
    None,
    SqrtLog,
    InvSqrtLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub s: f64,
    pub log_mode: LogMode,
}

impl WeightSpec {
    pub const fn new(s: f64, log_mode: LogMode) -> Self {
        Self { s, log_mode }
    }

    /// `H^{-1/2, √log}`, the phase space of the potentials.
    pub const PHASE_SPACE: Self = Self::new(-0.5, LogMode::SqrtLog);

    /// Weight applied to `|ẑ(n)|²`.
    #[inline]
    pub fn weight(&self, n: i64) -> f64 {
        let b = bracket(n);
        let base = b.powf(2.0 * self.s);
        match self.log_mode {
            LogMode::None => base,
            LogMode::SqrtLog => base * (b + 1.0).ln(),
            LogMode::InvSqrtLog => base / (b + 1.0).ln(),
        }
    }
}

/// Truncated weighted norms `(Σ w(n) |ẑ(n)|²)^{1/2}` over every represented mode.
pub trait WeightedNorm {
    fn weighted_norm_sq(&self, w: &WeightSpec) -> f64;

    fn weighted_norm(&self, w: &WeightSpec) -> f64 {
        self.weighted_norm_sq(w).sqrt()
    }
}

impl WeightedNorm for PotentialSpectrum {
    fn weighted_norm_sq(&self, w: &WeightSpec) -> f64 {
        2.0 * self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| w.weight(i as i64 + 1) * c.norm_sqr())
            .sum::<f64>()
    }
}

impl WeightedNorm for HardyFunction {
    fn weighted_norm_sq(&self, w: &WeightSpec) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| w.weight(i as i64) * c.norm_sqr())
            .sum()
    }
}

/// Two-sided truncated Fourier series `Σ_{|k| ≤ n_max} ĉ(k) e^{ikx}`, used for products.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSeries {
    n_max: usize,
    coeffs: Vec<Complex64>,
}

impl FourierSeries {
    pub fn from_potential(u: &PotentialSpectrum) -> Self {
        let n = u.n_max();
        Self {
            n_max: n,
            coeffs: (-(n as i64)..=n as i64).map(|k| u.coeff(k)).collect(),
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.n_max {
            ZERO
        } else {
            self.coeffs[(k + self.n_max as i64) as usize]
        }
    }

    /// Exact pointwise product, evaluated on a grid wide enough to avoid aliasing.
    pub fn product(&self, other: &Self) -> Self {
        let n_out = self.n_max + other.n_max;
        let grid_len = grid::pow2_at_least(2 * n_out + 2).max(4 * self.n_max.max(other.n_max));
        let a = grid::synthesize(self.n_max, grid_len, |k| self.coeff(k));
        let b = grid::synthesize(other.n_max, grid_len, |k| other.coeff(k));
        let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let spec = grid::analyze(&prod);
        Self {
            n_max: n_out,
            coeffs: (-(n_out as i64)..=n_out as i64)
                .map(|k| spec[grid::slot(k, grid_len)])
                .collect(),
        }
    }
}

impl WeightedNorm for FourierSeries {
    fn weighted_norm_sq(&self, w: &WeightSpec) -> f64 {
        (-(self.n_max as i64)..=self.n_max as i64)
            .map(|k| w.weight(k) * self.coeff(k).norm_sqr())
            .sum()
    }
}

/// `T_u f = Π(u f)`: `(T_u f)^(m) = Σ_n û(m - n) f̂(n)` for `0 ≤ m ≤ N`, with the result
/// truncated at `N = min(u.n_max, f.n_max)`.
pub fn toeplitz_apply(u: &PotentialSpectrum, f: &HardyFunction) -> HardyFunction {
    let n = u.n_max().min(f.n_max());
    let coeffs = (0..=n as i64)
        .map(|m| {
            (0..=f.n_max() as i64)
                .map(|j| u.coeff(m - j) * f.coeff(j))
                .sum()
        })
        .collect();
    HardyFunction { coeffs }
}

/// Families accepted by [`make_potential`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialFamily {
    Zero,
    /// `u = a cos x`.
    Cosine { amplitude: f64 },
    /// `|û(n)| = scale · n^{-decay}` with uniform random phases from a seeded stream.
    Random { seed: u64, decay: f64, scale: f64 },
    /// `û(n) = ε qⁿ` with `ε = β / |log(1 - q)|`.
    Counterexample { beta: f64, q: f64 },
    Explicit { coeffs: Vec<[f64; 2]> },
}

/// Builds the truncated coefficient sequence of a potential family.
pub fn make_potential(family: &PotentialFamily, n_max: usize) -> Result<PotentialSpectrum> {
    if n_max < 1 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let mut coeffs = vec![ZERO; n_max];
    match family {
        PotentialFamily::Zero => {}
        PotentialFamily::Cosine { amplitude } => {
            if !amplitude.is_finite() {
                return Err(Error::NonFinite("cosine amplitude"));
            }
            coeffs[0] = Complex64::new(0.5 * amplitude, 0.0);
        }
        PotentialFamily::Random { seed, decay, scale } => {
            if !decay.is_finite() || !scale.is_finite() {
                return Err(Error::NonFinite("random family parameters"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for (i, c) in coeffs.iter_mut().enumerate() {
                let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                *c = Complex64::from_polar(scale * ((i + 1) as f64).powf(-decay), phase);
            }
        }
        PotentialFamily::Counterexample { beta, q } => {
            if !(q.is_finite() && *q > 0.0 && *q < 1.0) {
                return Err(Error::invalid(format!("q = {q} is outside (0, 1)")));
            }
            if !(beta.is_finite() && *beta > 0.0) {
                return Err(Error::invalid(format!("beta = {beta} must be positive")));
            }
            let eps = beta / (1.0 - q).ln().abs();
            let mut qn = 1.0;
            for c in coeffs.iter_mut() {
                qn *= q;
                *c = Complex64::new(eps * qn, 0.0);
            }
        }
        PotentialFamily::Explicit { coeffs: given } => {
            if given.len() > n_max {
                return Err(Error::invalid(format!(
                    "{} explicit coefficients exceed n_max = {n_max}",
                    given.len()
                )));
            }
            for (c, g) in coeffs.iter_mut().zip(given) {
                *c = Complex64::new(g[0], g[1]);
            }
        }
    }
    PotentialSpectrum::new(coeffs)
}
