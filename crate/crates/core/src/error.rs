use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {what} needs {requested}, cap is {cap}")]
    Resource {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("numerical instability at step {step}: norm drift {drift:.3e}")]
    NumericalInstability { step: usize, drift: f64 },

    #[error("sampling inconsistency: environment index {index} has zero probability mass")]
    ZeroMass { index: usize },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("eigendecomposition failed to converge for a {0}x{0} matrix")]
    Eigen(usize),

    #[error("missing snapshot at t = {0}")]
    MissingSnapshot(f64),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
