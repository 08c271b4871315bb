use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("invalid Schmidt vector: {0}")]
    InvalidSchmidtVector(String),

    #[error("parameter `{name}` out of range: {reason}")]
    OutOfRange { name: &'static str, reason: String },

    #[error("need {needed} moments, only {available} available")]
    InsufficientMoments { needed: usize, available: usize },

    #[error("need at least {needed} samples, got {available}")]
    InsufficientSamples { needed: usize, available: usize },
}

impl Error {
    pub(crate) fn out_of_range(name: &'static str, reason: impl Into<String>) -> Self {
        Error::OutOfRange {
            name,
            reason: reason.into(),
        }
    }
}
