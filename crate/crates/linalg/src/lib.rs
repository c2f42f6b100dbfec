//! Exact sparse linear algebra over Q and over word-size prime fields.
//!
//! Rank passes run modularly (primes above 2^31, defaults just below 2^62 so
//! eliminations can batch products in u128 before reducing); headline numbers
//! are accepted only when two independent primes agree.  Rational results are
//! recovered by CRT plus rational reconstruction and must re-verify exactly
//! over Q before they are returned.

pub mod echelon;
pub mod elim;
pub mod error;
pub mod modp;
pub mod rational;
pub mod sparse;

pub use echelon::IncrementalEchelon;
pub use elim::{nullspace_mod, nullspace_q, rank_exact, rank_mod, rank_q};
pub use error::LinalgError;
pub use modp::{default_primes, fallback_primes, is_prime_u64, prime_below};
pub use rational::{
    crt_combine, lift_mod_to_rational, parse_rational, rational_reconstruct, BigInt, Rational,
};
pub use sparse::{SparseMatrixMod, SparseMatrixQ};
