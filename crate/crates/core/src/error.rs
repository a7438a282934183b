use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("input must be nonnegative (min value {min:e})")]
    NegativeInput { min: f64 },

    #[error("time step {dt:e} violates the transport CFL limit {limit:e}")]
    Stability { dt: f64, limit: f64 },

    #[error("non-finite values detected at t = {time}")]
    BlowUp { time: f64 },

    #[error("requested time {t} is not below the existence horizon T = {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },

    #[error("root bracket expansion failed for target {target} ({stage})")]
    BracketFailure { target: String, stage: &'static str },

    #[error("characteristic inversion failed at x = {x}: {reason}")]
    InversionFailed { x: f64, reason: String },

    #[error("Picard iteration diverged after {iterations} iterations")]
    Divergence { iterations: usize },

    #[error("smallness condition violated: a = {a:e}, empirical constant {constant:e}")]
    NotSmall { a: f64, constant: f64 },

    #[error("particle near-collision: ordering not restored after {halvings} step halvings at t = {time}")]
    NearCollision { halvings: usize, time: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
