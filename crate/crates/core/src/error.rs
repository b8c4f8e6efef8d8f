//! Error type shared across the library.

use thiserror::Error;

/// Errors reported by constructors and analyses.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A vector or matrix had the wrong dimension for the space at hand.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Two objects live on different state spaces.
    #[error("state space mismatch: {0}")]
    SpaceMismatch(String),

    /// A coordinate was NaN or infinite.
    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),

    /// A matrix failed the Markov-operator checks.
    #[error("not a Markov operator: {0}")]
    NotMarkov(String),

    /// A matrix failed the idempotence check P^2 = P.
    #[error("not a projection: ||P^2 - P|| = {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotIdempotent { defect: f64, tol: f64 },

    /// A generator failed the rate-matrix (or Bloch-generator) checks.
    #[error("not a valid generator: {0}")]
    NotGenerator(String),

    /// Blocks do not partition the index set, or weights are inconsistent.
    #[error("invalid block structure: {0}")]
    InvalidPartition(String),

    /// A scalar parameter was out of range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An operation was called on the wrong semigroup kind.
    #[error("wrong semigroup kind: {0}")]
    WrongKind(String),

    /// A required precondition did not hold (e.g. invariance T_t P = P).
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Exhaustive enumeration was requested above the dimension guard.
    #[error("dimension {n} exceeds the exhaustive-enumeration guard {max}")]
    DimensionGuard { n: usize, max: usize },

    /// An operation requiring a specific space kind got the other one.
    #[error("unsupported space for this operation: {0}")]
    UnsupportedSpace(String),

    /// A certificate of the wrong mode was passed to a rate helper.
    #[error("wrong certificate mode: {0}")]
    WrongMode(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
