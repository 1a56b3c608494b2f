use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },

    #[error("missing setting `{0}` (give it in the manifest or as a flag)")]
    MissingSetting(&'static str),

    #[error("data file {} does not exist", .0.display())]
    MissingFile(PathBuf),

    #[error("{0}")]
    Invalid(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] pbts_core::Error),

    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("writing JSON: {0}")]
    Json(#[from] serde_json::Error),
}
