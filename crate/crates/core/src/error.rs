//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by ingest, model fitting, and the stress pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("csv parse error at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("dates are not strictly increasing at row {row}")]
    NonIncreasingDates { row: usize },

    #[error("column `{ticker}` has no observed values")]
    EmptyColumn { ticker: String },

    #[error("cleaning dropped every row: no leading row is fully observed")]
    EmptyAfterCleaning,

    #[error("non-positive price for `{ticker}` at row {row}")]
    NonPositivePrice { ticker: String, row: usize },

    #[error("ticker `{ticker}` is missing from the sector map")]
    MissingSector { ticker: String },

    #[error("series `{name}` has zero variance")]
    DegenerateSeries { name: String },

    #[error("{context}: expected {expected} columns, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("window length {window} exceeds available rows {rows}")]
    WindowTooLong { window: usize, rows: usize },

    #[error("series too short: need at least {needed} observations, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("regression design matrix is singular")]
    SingularRegression,

    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
