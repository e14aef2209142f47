//! Error type shared across the pipeline.

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by corpus loading, training, classification and
/// model persistence.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    /// I/O error carrying the path that was being accessed.
    #[error("{path}: {source}")]
    IoAt {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed record in a line-delimited input file.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A value does not match its required textual format.
    #[error("format error: {0}")]
    Format(String),

    /// Data violates an invariant (duplicate ids, unresolvable members, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// An argument is outside its allowed range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The input is too degenerate for the operation (empty corpus,
    /// single-class training data, zero matrix, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An iterative solver failed to converge; the message reports the
    /// residual at the last iterate.
    #[error("did not converge: {0}")]
    Convergence(String),

    /// A persisted model failed an integrity check.
    #[error("model integrity: {0}")]
    Integrity(String),

    /// Invalid configuration file or key.
    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Attaches a path to a raw I/O error.
    pub fn io_at(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoAt {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
