//! Crate-wide error type.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse scenario {path}: {message}")]
    ScenarioParse { path: PathBuf, message: String },

    /// One entry per violated constraint; the CLI prints them all.
    #[error("invalid scenario: {}", violations.join("; "))]
    ScenarioInvalid { violations: Vec<String> },

    #[error("failed to parse {what} {path}: {message}")]
    DataParse {
        what: &'static str,
        path: PathBuf,
        message: String,
    },

    #[error("population synthesis failed: {0}")]
    Synthesis(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
