use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to converge or produced a non-finite value.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Input data cannot resolve the requested quantity.
    #[error("precision error: {0}")]
    Precision(String),

    /// Invalid or inconsistent configuration, reported before compute starts.
    #[error("configuration error: {0}")]
    Config(String),

    /// A standing assumption on the ground state or potential failed numerically.
    #[error("assumption violated: {0}")]
    Assumption(String),

    /// An internal invariant was observed to fail during a run.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<toml::de::Error> for Error {
    fn from(e: toml::de::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
