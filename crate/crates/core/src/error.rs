use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A numerical routine failed to converge or lost accuracy; the message
    /// carries diagnostics (iteration counts, residuals, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A signal-analysis estimate could not be formed (e.g. no dominant
    /// spectral peak above the noise floor).
    #[error("estimation failure: {0}")]
    Estimation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
