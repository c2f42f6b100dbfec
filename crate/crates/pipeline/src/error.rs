use thiserror::Error;

/// Errors from pipeline stages.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("bracket image has corank {corank}, expected exactly 1")]
    CorankNotOne { corank: usize },
    #[error("kernel vector vanishes on the witness spider; the cocycle should be nonzero there")]
    WitnessVanishes,
    #[error("rational reconstruction still failing after {primes_used} primes")]
    PrimeExhaustion { primes_used: usize },
    #[error("rank check failed mod {prime}: got {got}, expected {expected}")]
    RankCertification {
        prime: u64,
        got: usize,
        expected: usize,
    },
    #[error("cocycle fails on holdout bracket {bracket}: value {value}")]
    Holdout { bracket: String, value: String },
    #[error("kernel vector fails exact re-multiplication on row {row}")]
    KernelCheck { row: usize },
    #[error("artifact invalid: {0}")]
    Artifact(String),
    #[error(transparent)]
    Core(#[from] sympder_core::CoreError),
    #[error(transparent)]
    Linalg(#[from] sympder_linalg::LinalgError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
