use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: malformed CSV: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    /// A parse or validation failure at a known location of an input file.
    #[error("{path}: {location}: {message}")]
    Format {
        path: PathBuf,
        location: String,
        message: String,
    },

    /// Invalid argument or violated precondition.
    #[error("{0}")]
    Invalid(String),

    /// The input data is too degenerate for the requested computation.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Training diverged.
    #[error("non-finite loss {loss} at epoch {epoch}, batch {batch} (lr = {lr})")]
    NonFiniteLoss {
        loss: f64,
        epoch: usize,
        batch: usize,
        lr: f64,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn format(path: &std::path::Path, location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Stable machine-readable kind tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Json { .. } => "json",
            Error::Csv { .. } => "csv",
            Error::Format { .. } => "format",
            Error::Invalid(_) => "invalid",
            Error::Degenerate(_) => "degenerate",
            Error::NonFiniteLoss { .. } => "non_finite_loss",
        }
    }

    /// Path of the offending input file, when there is one.
    pub fn path(&self) -> Option<&std::path::Path> {
        match self {
            Error::Io { path, .. } | Error::Json { path, .. } | Error::Csv { path, .. } | Error::Format { path, .. } => {
                Some(path)
            }
            _ => None,
        }
    }
}
