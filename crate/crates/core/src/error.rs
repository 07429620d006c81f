use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty input")]
    Empty,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("series did not converge within {max_terms} terms")]
    SeriesDivergence { max_terms: usize },

    #[error("enumeration grid too large: {size} points exceeds the limit of {limit}")]
    GridTooLarge { size: u128, limit: u128 },

    #[error("improper prior: {0}")]
    ImproperPrior(String),

    #[error("psi function violates {condition} at z = {z}")]
    InvalidPsi { condition: &'static str, z: u64 },

    #[error("nonpositive denominator in {0}")]
    NonpositiveDenominator(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
