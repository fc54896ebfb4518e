use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the domain of a closed-form relation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    /// Text input (pattern file, scenario config) failed to parse.
    #[error("{}line {line}, column {column}: {message}", source_prefix(.path))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown configuration key `{key}` at line {line}")]
    UnknownKey { key: String, line: usize },

    #[error("invalid value for `{key}` at line {line}: {message}")]
    InvalidValue {
        key: String,
        line: usize,
        message: String,
    },

    #[error("grid of {cells} cells exceeds the cell budget of {budget}")]
    CellBudget { cells: usize, budget: usize },

    #[error("numerical instability at step {step}: {message}")]
    Instability { step: u64, message: String },

    #[error("field map format error: {0}")]
    Format(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn source_prefix(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }

    /// True for errors caused by the caller's inputs rather than the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Geometry(_)
                | Error::Parse { .. }
                | Error::UnknownKey { .. }
                | Error::InvalidValue { .. }
                | Error::CellBudget { .. }
                | Error::Format(_)
                | Error::DimensionMismatch(_)
        )
    }

    /// Attach a file path to a parse error.
    pub fn with_path(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Parse {
                line,
                column,
                message,
                ..
            } => Error::Parse {
                path: Some(path.into()),
                line,
                column,
                message,
            },
            other => other,
        }
    }
}
