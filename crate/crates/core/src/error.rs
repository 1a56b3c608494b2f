//! Error type shared by every module of the crate.

use thiserror::Error;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    /// A cell could not be parsed. `row` is the 1-based data row (header excluded).
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("non-positive price {value} for asset {asset} on {date}")]
    NonPositivePrice {
        asset: String,
        date: String,
        value: f64,
    },

    #[error("invalid gross return {value} for asset {asset} on {date}")]
    InvalidReturn {
        asset: String,
        date: String,
        value: f64,
    },

    #[error("duplicate date label {0}")]
    DuplicateDate(String),

    #[error("insufficient data: need at least {needed} rows, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("insufficient history: tau = {tau} requires more than {tau} periods, panel has {periods}")]
    InsufficientHistory { tau: usize, periods: usize },

    #[error("window out of bounds: end = {end}, len = {len}, rows = {rows}")]
    OutOfBounds { end: usize, len: usize, rows: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("covariance matrix is not positive definite")]
    SingularCovariance,

    #[error("net return {value} at index {index} wipes out the portfolio")]
    Bankruptcy { index: usize, value: f64 },

    #[error("arm return history is empty")]
    NotWarmedUp,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
