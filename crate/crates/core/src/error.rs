use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} bins, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameter outside the admissible set of {family}: {reason}")]
    Domain { family: String, reason: String },

    #[error("estimation failed for {family}: {reason}")]
    Estimation { family: String, reason: String },

    #[error("outcome space too large: {outcomes} outcomes exceeds the limit of {limit}")]
    Capacity { outcomes: u128, limit: u128 },

    #[error("unknown dataset `{name}`; valid names: {valid}")]
    UnknownDataset { name: String, valid: String },

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("bad model spec `{spec}`: {reason}")]
    Spec { spec: String, reason: String },
}
