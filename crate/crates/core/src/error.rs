use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter is outside the domain where the formula holds.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input: empty grids, mismatched lengths, bad bounds.
    #[error("invalid input: {0}")]
    Usage(String),

    #[error("Hilbert space dimension {dim} exceeds the cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("expected {expected} line features, found {found}: {listing}")]
    Features {
        expected: usize,
        found: usize,
        listing: String,
    },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}
