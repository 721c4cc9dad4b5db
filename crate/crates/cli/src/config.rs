//! Run parameters from flags and from versioned JSON config files.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::Failure;

pub const SCHEMA: u64 = 1;

/// Every tunable. Unset fields fall back to the config file, then to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Potential family: zero, cosine, random or counterexample.
    #[arg(long)]
    pub family: Option<String>,
    /// Amplitude `a` of `a cos x`.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Seed of the random family and of the verification ensembles.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Decay exponent of the random family.
    #[arg(long)]
    pub decay: Option<f64>,
    /// Scale of the random family.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Number of potential coefficients generated from the family.
    #[arg(long)]
    pub coeffs: Option<usize>,
    /// Input CSV: a potential (`k,re,im`) or, for `invert`, Birkhoff coordinates.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Lax truncation M.
    #[arg(long)]
    pub modes: Option<usize>,
    /// compensated, standard or auto.
    #[arg(long)]
    pub precision: Option<String>,
    /// Birkhoff coordinates solved for by the inverse.
    #[arg(long)]
    pub coords: Option<usize>,
    /// birkhoff or direct.
    #[arg(long)]
    pub method: Option<String>,
    /// Output times, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub tgrid: Option<Vec<f64>>,
    /// Direct-integrator time step.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Collocation points of the direct integrator.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Geometric ratios, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    /// Also compute the windowed observable where the decay-rule truncation fits.
    #[arg(long)]
    pub window: Option<bool>,
    /// Largest Lax truncation used for the windowed observable.
    #[arg(long)]
    pub window_max_m: Option<usize>,
    /// Verification suite.
    #[arg(long)]
    pub suite: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        Params { $($f: $hi.$f.or($lo.$f)),* }
    };
}

impl Params {
    /// Fields set here win over `lower`.
    pub fn over(self, lower: Params) -> Params {
        overlay!(
            self, lower, family, amplitude, seed, decay, scale, coeffs, input, modes, precision, coords,
            method, tgrid, dt, grid, beta, q, window, window_max_m, suite, out
        )
    }
}

/// A config file: `{"schema": 1, "command": "...", <params>}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub params: Params,
}

pub fn parse_config(text: &str) -> Result<ConfigFile, Failure> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Failure::Validation(format!("config is not valid JSON: {e}")))?;
    let serde_json::Value::Object(mut map) = value else {
        return Err(Failure::Validation("config must be a JSON object".into()));
    };
    match map.remove("schema").and_then(|v| v.as_u64()) {
        Some(SCHEMA) => {}
        Some(v) => return Err(Failure::Validation(format!("unsupported config schema {v}, expected {SCHEMA}"))),
        None => return Err(Failure::Validation("config needs an integer \"schema\" field".into())),
    }
    let command = match map.remove("command") {
        None => None,
        Some(serde_json::Value::String(s)) => Some(s),
        Some(v) => return Err(Failure::Validation(format!("\"command\" must be a string, got {v}"))),
    };
    let params = serde_json::from_value(serde_json::Value::Object(map))
        .map_err(|e| Failure::Validation(format!("config: {e}")))?;
    Ok(ConfigFile { command, params })
}

pub fn load_config(path: &Path) -> Result<ConfigFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}
