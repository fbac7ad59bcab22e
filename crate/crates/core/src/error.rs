use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid discriminant {0}: must be negative and congruent to 0 or 1 mod 4")]
    InvalidDiscriminant(i64),
    #[error("discriminant {delta} is out of scope: {reason}")]
    OutOfScope { delta: i64, reason: &'static str },
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix has determinant {0}, expected 1")]
    DeterminantNotOne(String),
    #[error("matrix is upper triangular and has no isometric hemisphere")]
    NoHemisphere,
    #[error("zeta chain hits zero at position {0}")]
    DegenerateChain(usize),
    #[error("edge cycle starting at edge {0} does not close")]
    CycleNotClosed(usize),
    #[error("cycle transformation has no finite order within cap {0}")]
    NonEllipticCycle(u32),
    #[error("face pairing cannot be applied to this edge: {0}")]
    UnsupportedPairing(String),
    #[error("presentation cross-check failed: {0}")]
    PresentationMismatch(String),
    #[error("no normalizer witness with norm at most {0}")]
    WitnessNotFound(u64),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
