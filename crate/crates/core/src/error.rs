use thiserror::Error;

/// Errors produced by the simulation, bound and oracle routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (relative deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("dense dimension 2^{qubits} exceeds the cap 2^{cap}")]
    DimensionCap { qubits: usize, cap: usize },

    #[error("enumeration over {size} letters exceeds the cap of {cap}")]
    EnumerationCap { size: usize, cap: usize },

    #[error("segment search exceeded r = {cap} without meeting the target")]
    BracketCap { cap: u64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("term id {id} out of range 1..={len}")]
    TermOutOfRange { id: usize, len: usize },

    #[error("serialization: {0}")]
    Serde(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
