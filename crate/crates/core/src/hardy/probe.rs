//! Empirical constants for the bilinear product estimates in log-weighted spaces.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FourierSeries, LogMode, PotentialSpectrum, WeightSpec, WeightedNorm};
use crate::{Error, Result};

/// Source of `(u, v)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleSpec {
    /// `|û(n)| = n^{-p_u}`, `|v̂(n)| = n^{-p_v}`, uniform phases. Pair `i` draws `u` from
    /// stream `2i` and `v` from stream `2i + 1` of the seeded generator, so prefixes are
    /// stable when `n_max` grows.
    Random {
        pairs: usize,
        seed: u64,
        n_max: usize,
        p_u: f64,
        p_v: f64,
    },
    #[serde(skip)]
    Explicit(Vec<(PotentialSpectrum, PotentialSpectrum)>),
}

impl EnsembleSpec {
    pub fn random(pairs: usize, seed: u64, n_max: usize) -> Self {
        EnsembleSpec::Random { pairs, seed, n_max, p_u: 0.5, p_v: 1.5 }
    }

    fn materialize(&self) -> Result<Vec<(PotentialSpectrum, PotentialSpectrum)>> {
        match self {
            EnsembleSpec::Explicit(v) => Ok(v.clone()),
            EnsembleSpec::Random { pairs, seed, n_max, p_u, p_v } => {
                if *n_max < 1 {
                    return Err(Error::invalid("ensemble n_max must be at least 1"));
                }
                if !p_u.is_finite() || !p_v.is_finite() {
                    return Err(Error::NonFinite("ensemble decay exponents"));
                }
                let draw = |stream: u64, p: f64| {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    rng.set_stream(stream);
                    let coeffs = (1..=*n_max)
                        .map(|n| {
                            Complex64::from_polar(
                                (n as f64).powf(-p),
                                rng.gen_range(0.0..std::f64::consts::TAU),
                            )
                        })
                        .collect();
                    PotentialSpectrum::new(coeffs)
                };
                (0..*pairs as u64)
                    .map(|i| Ok((draw(2 * i, *p_u)?, draw(2 * i + 1, *p_v)?)))
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
}

impl RatioSummary {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        Some(Self {
            count: n,
            min: sorted[0],
            max: sorted[n - 1],
            mean: sorted.iter().sum::<f64>() / n as f64,
            median,
        })
    }
}

/// Per-pair ratios plus summaries.
///
/// `product_ratio = ‖uv‖_{-1/2} / (‖u‖_{-1/2,√log} ‖v‖_{1/2})` and
/// `half_ratio = ‖uv‖_{1/2,1/√log} / (‖u‖_{1/2} ‖v‖_{1/2})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    /// `(pair index, product_ratio, half_ratio)`.
    pub rows: Vec<(usize, f64, f64)>,
    pub skipped: usize,
    pub product_ratio: Option<RatioSummary>,
    pub half_ratio: Option<RatioSummary>,
}

const NEG_HALF_SQRT_LOG: WeightSpec = WeightSpec::new(-0.5, LogMode::SqrtLog);
const NEG_HALF: WeightSpec = WeightSpec::new(-0.5, LogMode::None);
const HALF: WeightSpec = WeightSpec::new(0.5, LogMode::None);
const HALF_INV_LOG: WeightSpec = WeightSpec::new(0.5, LogMode::InvSqrtLog);

/// Evaluates both product ratios over an ensemble. Pairs where a denominator vanishes
/// are skipped and counted.
pub fn bilinear_constant_probe(ensemble: &EnsembleSpec) -> Result<ProbeReport> {
    let pairs = ensemble.materialize()?;
    let mut rows = Vec::with_capacity(pairs.len());
    let mut skipped = 0;
    for (i, (u, v)) in pairs.iter().enumerate() {
        let d1 = u.weighted_norm(&NEG_HALF_SQRT_LOG) * v.weighted_norm(&HALF);
        let d2 = u.weighted_norm(&HALF) * v.weighted_norm(&HALF);
        if d1 == 0.0 || d2 == 0.0 {
            skipped += 1;
            continue;
        }
        let uv = FourierSeries::from_potential(u).product(&FourierSeries::from_potential(v));
        rows.push((
            i,
            uv.weighted_norm(&NEG_HALF) / d1,
            uv.weighted_norm(&HALF_INV_LOG) / d2,
        ));
    }
    let r1: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let r2: Vec<f64> = rows.iter().map(|r| r.2).collect();
    Ok(ProbeReport {
        product_ratio: RatioSummary::of(&r1),
        half_ratio: RatioSummary::of(&r2),
        rows,
        skipped,
    })
}
