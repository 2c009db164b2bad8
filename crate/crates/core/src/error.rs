use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The Fock cutoff is too small for the requested amplitude.
    #[error("truncation error: {0}")]
    Truncation(String),

    /// Link or detector parameters that do not describe a valid device.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A covariance matrix or spectrum violates the uncertainty principle.
    #[error("non-physical state: {0}")]
    NonPhysical(String),

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    /// The closed-form and matrix spectra disagree.
    #[error("path mismatch: {0}")]
    PathMismatch(String),

    #[error("config error ({key}): {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Whether the error stems from numerics or physics rather than user input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonPhysical(_)
                | Error::Eigensolver(_)
                | Error::Truncation(_)
                | Error::PathMismatch(_)
        )
    }
}
