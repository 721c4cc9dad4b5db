use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("eigenvalues {index} and {} collide (separation {separation:e}); truncation too small", index - 1)]
    EigenvalueCollision { index: usize, separation: f64 },

    #[error("degenerate phase normalization at mode {index}: |inner product| = {magnitude:e}")]
    DegenerateNormalization { index: usize, magnitude: f64 },

    #[error("gap {index} is negative beyond tolerance: {gap:e}")]
    NegativeGap { index: usize, gap: f64 },

    #[error("non-positive norming factor at mode {index} (p = {p}): {factor:e}")]
    NonPositiveFactor { index: usize, p: usize, factor: f64 },

    #[error("-lambda = {shift} is within {distance:e} of eigenvalue {index}")]
    NearSingular { index: usize, shift: f64, distance: f64 },

    #[error("quadrature did not converge: relative change {change:e} at order {order}")]
    Quadrature { order: usize, change: f64 },

    #[error("integration blew up at t = {time}: norm {norm:e}")]
    BlowUp { time: f64, norm: f64 },

    #[error("inverse Birkhoff map did not converge: residual {residual:e} after {iterations} iterations")]
    InverseNotConverged { residual: f64, iterations: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Failures caused by bad parameters, as opposed to numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::NonFinite(_))
    }
}
