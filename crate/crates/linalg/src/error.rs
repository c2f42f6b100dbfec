use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("exact elimination refused: {rows}x{cols} exceeds the {limit}-entry limit")]
    ExactSizeLimit { rows: usize, cols: usize, limit: usize },
    #[error("rational entry has denominator divisible by the modulus {modulus}")]
    BadReduction { modulus: u64 },
    #[error("rational reconstruction failed for modulus of {bits} bits")]
    ReconstructionFailed { bits: u64 },
    #[error("snapshot parse error: {0}")]
    SnapshotParse(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
}
