//! Error type shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A record or cohort violates a structural invariant.
    #[error("invalid record: {0}")]
    InvalidRecord(String),

    /// A cohort-level problem: duplicate ids, empty input, bad schema line.
    #[error("invalid cohort: {0}")]
    InvalidCohort(String),

    /// Configuration that cannot be satisfied (e.g. unreachable target
    /// prevalence, non-positive hyperparameters).
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// A model artifact failed structural validation on load.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// A metric is undefined on the given input (single-class AUC, empty set).
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    /// Input to a numeric routine was malformed (NaN score, length mismatch).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid_record(msg: impl Into<String>) -> Self {
        Error::InvalidRecord(msg.into())
    }

    pub fn invalid_cohort(msg: impl Into<String>) -> Self {
        Error::InvalidCohort(msg.into())
    }

    pub fn invalid_config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub fn invalid_model(msg: impl Into<String>) -> Self {
        Error::InvalidModel(msg.into())
    }

    pub fn undefined_metric(msg: impl Into<String>) -> Self {
        Error::UndefinedMetric(msg.into())
    }

    pub fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
