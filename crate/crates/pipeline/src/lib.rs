//! End-to-end stages: bracket-image matrices, cocycle extraction and
//! verification, trace-map factorization, and abelianization dimensions.

pub mod abel;
pub mod brackets;
pub mod cocycle;
pub mod error;
pub mod es;
pub mod report;
pub mod stage;
pub mod symbolic_check;
pub mod wmatrix;

pub use abel::{abelianization_dim, full_bracket_rank, full_invariant_rank, odd_weight_dim};
pub use brackets::{combined_balanced, joinable, BracketSampler};
pub use cocycle::{
    extract_cocycle, verify_cocycle_numeric, Cocycle, CocycleVector, WITNESS_LEGS, WITNESS_VALUE,
};
pub use error::PipelineError;
pub use es::{
    certified_rank, chord_span_rank, es_apply, es_factorization_check, es_matrix,
    ChordClassTable, FactorizationOutcome,
};
pub use report::{Report, ReportBuilder, ReportConfig};
pub use stage::{stage_cocycle, stage_coordinates, stage_w_matrix, StageConfig, Staged};
pub use symbolic_check::{symbolic_bracket_polynomial, verify_cocycle_symbolic};
pub use wmatrix::{build_w_matrix, WMatrix};
