use thiserror::Error;

#[derive(Debug, Error)]
pub enum PivotError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("stale event table: {0}")]
    StaleTable(String),
    #[error("numerical failure at t = {t}, step {step}: {message}")]
    NumericalFailure { t: f64, step: usize, message: String },
    #[error("undefined relative error: reference norm is zero")]
    UndefinedRelativeError,
    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PivotError>;
