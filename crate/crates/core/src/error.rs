use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Error categories surfaced by the library and mapped onto CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or model parameter is outside its domain.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// Invalid run configuration (chain lengths, grid, sizes, ...).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Cholesky factorization hit a non-positive pivot.
    #[error("matrix is not positive definite: pivot {pivot} is {value}")]
    LinearAlgebra { pivot: usize, value: f64 },

    #[error("non-finite value encountered: {0}")]
    Numeric(String),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    /// A regression routine was handed classification data or vice versa.
    #[error("task mismatch: expected {expected} data, got {found}")]
    TaskMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("{path}: row {row}, column {column}: {message}")]
    Data {
        path: String,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::ParameterDomain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
