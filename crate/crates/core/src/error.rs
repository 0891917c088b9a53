use thiserror::Error;

use crate::network::NetworkError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("window [{lo}, {hi}] does not meet the grid [{a}, {b}]")]
    EmptyWindow { lo: f64, hi: f64, a: f64, b: f64 },

    #[error("seminorm index {index} outside 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid seminorm weights: {0}")]
    InvalidWeights(String),

    #[error("lambda must be positive, got {0}")]
    NonPositiveLambda(f64),

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("resolvent unavailable for generator '{0}'")]
    ResolventUnavailable(String),

    #[error("sample {index} is outside the domain of '{generator}'")]
    DomainViolation { generator: String, index: usize },

    #[error("unknown operator '{0}' (expected left_shift, right_translation or laplacian)")]
    UnknownOperator(String),

    #[error("grids do not match")]
    GridMismatch,

    #[error("singular system: {0}")]
    Singular(String),

    #[error("seminorm {0} vanishes; subdifferential construction is degenerate")]
    DegenerateSeminorm(usize),

    #[error(transparent)]
    Network(#[from] NetworkError),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub(crate) fn positive_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveLambda(lambda))
    }
}
