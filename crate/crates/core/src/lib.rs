//! Exact combinatorial algebra for symplectic derivations of a free Lie
//! algebra: the alphabet and intersection form, packed tensor words, free-Lie
//! expansions, spider generators and their bracket, pairing-diagram
//! coordinates, and the sampling that selects a well-conditioned coordinate
//! set at a given genus and weight.

pub mod contract;
pub mod coords;
pub mod element;
pub mod error;
pub mod lie;
pub mod matching;
pub mod monomial;
pub mod spider;
pub mod symbolic;
pub mod sym;

pub use contract::{
    contract, contract_expansion, matching_profile, selected_profile, SelectedMatchings,
};
pub use coords::{select_coordinates, CoordinateSystem, SamplingBudget};
pub use element::{Expansion, TensorElement};
pub use error::CoreError;
pub use lie::{bracket_map, is_h_member, lie_dim, omega, LieWord};
pub use monomial::TensorMonomial;
pub use spider::{
    commutator_element, derivation_commutator_oracle, spider_bracket, BracketSum,
    DerivationTable, Spider, SpiderSum, Splice,
};
pub use symbolic::{symbolic_contract, MuMonomial, MuPolynomial};
pub use sym::{mu_eval, mu_sign, Genus, Kind, Letter};
