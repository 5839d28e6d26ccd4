use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the benchmark.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("episode error: {0}")]
    Episode(String),

    #[error("generation failed: {msg} (attempts={attempts}, failures={failures})")]
    Generation {
        msg: String,
        attempts: u64,
        failures: u64,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("training aborted: {0}")]
    Training(String),

    #[error("format error in {record}: {msg}")]
    Format { record: String, msg: String },

    #[error("unsupported format version in {record}: {msg}")]
    Version { record: String, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn format(record: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Format {
            record: record.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
