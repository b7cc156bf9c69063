use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: String,
        got: usize,
        expected: usize,
    },

    #[error("parameter layout mismatch: family expects {expected} values, got {got}")]
    Layout { expected: usize, got: usize },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: &'static str,
    },

    #[error("outcome {value} at row {row} is outside the support of the {family} family")]
    Support {
        row: usize,
        value: f64,
        family: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dataset validation failed: {0}")]
    Validation(String),

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("discrepancy not realizable: {0}")]
    Discrepancy(String),

    #[error("CSV error: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
