use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, NscError>;

#[derive(Debug, Error)]
pub enum NscError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected} samples, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("reality violation: conjugate-symmetry defect {defect:.3e} exceeds {tolerance:.1e}")]
    RealityViolation { defect: f64, tolerance: f64 },

    #[error("divergence violation: relative residual {residual:.3e} exceeds {tolerance:.1e}")]
    DivergenceViolation { residual: f64, tolerance: f64 },

    #[error("field has nonzero vertical-mean (n = 0) content of size {magnitude:.3e}")]
    NonzeroVerticalMean { magnitude: f64 },

    #[error("symbol undefined at the (k = 0, n = 0) mode")]
    ZeroMode,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "CFL violation: dt * max|u| * max|k| = {number:.4} > {limit} \
         (dt = {dt:.3e}, max|u| = {max_speed:.4e}, max|k| = {max_wavenumber:.4})"
    )]
    Cfl {
        dt: f64,
        max_speed: f64,
        max_wavenumber: f64,
        number: f64,
        limit: f64,
    },

    #[error("non-finite values at t = {t:.6}; last valid state at t = {last_valid_t:.6}{}",
        .checkpoint.as_ref().map(|p| format!(" saved to {}", p.display())).unwrap_or_default())]
    NonFinite {
        t: f64,
        last_valid_t: f64,
        checkpoint: Option<PathBuf>,
    },

    #[error("fit needs at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("fit requires positive values; sample {index} is {value:e}")]
    NonPositiveSample { index: usize, value: f64 },

    #[error("checkpoint format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl NscError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        NscError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
