use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("window mismatch: {left} vs {right}")]
    WindowMismatch { left: usize, right: usize },

    #[error("index ({row}, {col}) outside window of size {window}")]
    IndexOutOfWindow { row: usize, col: usize, window: usize },

    #[error("window of size {window} too small, need at least {needed}")]
    WindowTooSmall { window: usize, needed: usize },

    #[error("power iteration did not converge after {iterations} iterations (last estimate {last_estimate})")]
    NoConvergence { iterations: usize, last_estimate: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("gave up after {attempts} attempts")]
    RetryExhausted { attempts: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("approximation budget not met: error {error} >= budget {budget}")]
    ApproximationBudget { error: f64, budget: f64 },

    #[error("path lost invertibility at stage {stage}: sigma_min {sigma_min}")]
    Singular { stage: String, sigma_min: f64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
