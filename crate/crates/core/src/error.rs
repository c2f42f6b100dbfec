use thiserror::Error;

/// Errors from the symplectic/tensor layer.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("genus {0} out of range (supported: 1..=16)")]
    GenusRange(usize),
    #[error("letter {letter} outside genus {genus}")]
    LetterRange { letter: String, genus: usize },
    #[error("tensor degree {0} exceeds the packed-word limit of 21")]
    DegreeTooLarge(usize),
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("spider needs at least 2 legs, got {0}")]
    TooFewLegs(usize),
    #[error("weight {0} is odd; graded pieces of interest have even weight")]
    OddWeight(usize),
    #[error("tensor degree {0} is odd; contraction needs a perfect matching")]
    OddDegree(usize),
    #[error("bracket of elements with degrees {0} and {1} leaves the supported range")]
    BracketDegree(usize, usize),
    #[error("matching rank {rank} out of range for {points} points")]
    MatchingRank { rank: u64, points: usize },
    #[error("coordinate artifact invalid: {0}")]
    Artifact(String),
    #[error(
        "sampling budget exhausted after {batches} batches with rank still moving; \
         current lower bound {lower_bound}"
    )]
    Unstabilized { lower_bound: usize, batches: usize },
    #[error(transparent)]
    Linalg(#[from] sympder_linalg::LinalgError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
