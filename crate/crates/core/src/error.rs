use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is missing, empty or contradictory.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// The dataset file is malformed or a record breaks an invariant.
    #[error("data error{}: {message}", location(.row, .field))]
    Data {
        row: Option<usize>,
        field: Option<String>,
        message: String,
    },

    #[error("i/o error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The SMO solver hit its iteration cap before meeting the KKT tolerance.
    #[error("solver did not converge after {iterations} iterations (violation gap {gap:.3e})")]
    NotConverged { iterations: usize, gap: f64 },

    #[error("serialization error: {0}")]
    Serialization(String),
}

fn location(row: &Option<usize>, field: &Option<String>) -> String {
    match (row, field) {
        (Some(r), Some(f)) => format!(" at row {r}, field `{f}`"),
        (Some(r), None) => format!(" at row {r}"),
        (None, Some(f)) => format!(" in field `{f}`"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn data(message: impl Into<String>) -> Self {
        Error::Data {
            row: None,
            field: None,
            message: message.into(),
        }
    }

    pub(crate) fn data_at(row: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Data {
            row: Some(row),
            field: Some(field.into()),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
