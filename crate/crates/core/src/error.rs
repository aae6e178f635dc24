use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
#[non_exhaustive]
pub enum Error {
    #[error("schema mismatch: column `{column}` is not present in the input")]
    SchemaMismatch { column: String },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("parse error in row {row}, column `{column}`: cannot read `{value}` as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("validation error in row {row}: {message}")]
    Validation { row: usize, message: String },

    #[error("empty input: no data rows")]
    EmptyInput,

    #[error("empty schema: at least one attribute is required")]
    EmptySchema,

    #[error("out of range: {0}")]
    Range(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite numeric input: {0}")]
    Numeric(String),

    #[error("no convergence after {cycles} active-set cycles")]
    Convergence { cycles: usize, best: Vec<f64> },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
