//! Error type shared across the workspace.

use std::fmt;
use std::path::PathBuf;

/// Everything that can go wrong in the core library, grouped by the category
/// a caller would dispatch on (the CLI maps these onto exit codes).
#[derive(Debug)]
pub enum Error {
    /// Tensor/layer shape mismatch. The message names the offending shapes.
    Dimension(String),
    /// Invalid configuration value (hyperparameter out of range, unsupported
    /// class count, malformed config key).
    Config(String),
    /// Unknown class label or malformed one-hot row.
    Label(String),
    /// Dataset-level problem: missing split, empty split, bad layout.
    Dataset(String),
    /// A specific file could not be decoded.
    Ingestion { path: PathBuf, reason: String },
    /// Checkpoint failed validation (bad magic, version, checksum, layout).
    Integrity(String),
    /// API misuse, e.g. a backward pass fed a trace from a different graph.
    Usage(String),
    /// Underlying I/O failure with the path it happened on.
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(msg) => write!(f, "dimension: {msg}"),
            Error::Config(msg) => write!(f, "config: {msg}"),
            Error::Label(msg) => write!(f, "label: {msg}"),
            Error::Dataset(msg) => write!(f, "dataset: {msg}"),
            Error::Ingestion { path, reason } => {
                write!(f, "ingestion: {}: {reason}", path.display())
            }
            Error::Integrity(msg) => write!(f, "integrity: {msg}"),
            Error::Usage(msg) => write!(f, "usage: {msg}"),
            Error::Io { context, source } => write!(f, "i/o: {context}: {source}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
