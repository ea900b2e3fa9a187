use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid scalar ring: {0}")]
    InvalidRing(String),

    #[error("operation requires an exact ring (prime field or rationals), got {0}")]
    InexactRing(String),

    #[error("operation requires a complex floating-point ring, got {0}")]
    NotComplex(String),

    #[error("ring {ring} has no primitive root of unity of order {order}")]
    MissingRootOfUnity { ring: String, order: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("state is not invariant under the cyclic shift by {shift}")]
    NotInvariant { shift: usize },

    #[error("arithmetic overflow while computing {0}")]
    Overflow(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
