//! The bracket-image matrix `W`.
//!
//! Rows are bracket expansions `[P, Q]` written in the selected invariant
//! coordinates. Only rows that enlarge the span are kept, so `rows.len()`
//! equals the rank. Sampling stops once the rank survives a configured
//! number of consecutive batches unchanged, and the final rank is certified
//! under a second prime.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sympder_core::{
    selected_profile, spider_bracket, CoordinateSystem, CoreError, Genus, SamplingBudget, Spider,
};
use sympder_linalg::{rank_mod, IncrementalEchelon, SparseMatrixMod};

use crate::brackets::BracketSampler;
use crate::error::PipelineError;

/// A rank-revealing set of bracket rows over a coordinate system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WMatrix {
    pub genus: usize,
    pub weight: usize,
    pub seed: u64,
    pub primes: [u64; 2],
    pub ncols: usize,
    pub rank: usize,
    pub batches_used: usize,
    /// Independent rows, dense over the selected matching columns.
    pub rows: Vec<Vec<i64>>,
    /// The spider pair generating each row, in leg notation.
    pub generators: Vec<[String; 2]>,
}

impl WMatrix {
    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec(self)?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let w: WMatrix = serde_json::from_slice(&fs::read(path)?)?;
        if w.rows.len() != w.rank || w.rows.iter().any(|r| r.len() != w.ncols) {
            return Err(PipelineError::Artifact(
                "row count or width disagrees with the recorded rank".into(),
            ));
        }
        Ok(w)
    }

    pub(crate) fn sparse_mod(&self, p: u64) -> SparseMatrixMod {
        let mut m = SparseMatrixMod::new(self.ncols, p);
        for row in &self.rows {
            let entries: Vec<(u32, i64)> = row
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(j, &v)| (j as u32, v))
                .collect();
            m.push_row_i64(&entries);
        }
        m
    }

    /// Re-derive the rank under `p` from the stored rows.
    pub fn rank_under(&self, p: u64) -> usize {
        rank_mod(&self.sparse_mod(p))
    }
}

/// Accumulate bracket rows over `cs` until the rank stabilizes.
///
/// `genus` may exceed the genus of `cs`: the coordinates stay fixed while
/// the sampled spiders draw letters from the larger alphabet.
pub fn build_w_matrix(
    cs: &CoordinateSystem,
    genus: Genus,
    seed: u64,
    budget: &SamplingBudget,
    primes: [u64; 2],
) -> Result<WMatrix, PipelineError> {
    let sel = cs.selected()?;
    let mut out = WMatrix {
        genus: genus.get(),
        weight: cs.weight,
        seed,
        primes,
        ncols: cs.rank,
        rank: 0,
        batches_used: 0,
        rows: Vec::new(),
        generators: Vec::new(),
    };
    if cs.rank == 0 {
        return Ok(out);
    }
    let mut sampler = BracketSampler::new(genus, cs.weight, seed);
    let mut ech = IncrementalEchelon::new(cs.rank, primes[0]);
    let mut stable = 0;
    for batch in 1..=budget.max_batches {
        let before = ech.rank();
        for _ in 0..budget.batch_size {
            let (p, q) = sampler.next_pair();
            let row = selected_profile(&spider_bracket(&p, &q)?.to_expansion(), &sel)?;
            let entries: Vec<(u32, i64)> = row
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(j, &v)| (j as u32, v))
                .collect();
            if ech.insert(&entries).is_some() {
                out.rows.push(row);
                out.generators.push([p.to_string(), q.to_string()]);
            }
        }
        out.batches_used = batch;
        stable = if ech.rank() == before { stable + 1 } else { 0 };
        if stable >= budget.stable_batches || ech.rank() == cs.rank {
            break;
        }
        if batch == budget.max_batches {
            return Err(CoreError::Unstabilized {
                lower_bound: ech.rank(),
                batches: batch,
            }
            .into());
        }
    }
    out.rank = ech.rank();
    let certified = out.rank_under(primes[1]);
    if certified != out.rank {
        return Err(PipelineError::RankCertification {
            prime: primes[1],
            got: certified,
            expected: out.rank,
        });
    }
    Ok(out)
}

/// A fresh bracket row in the selected coordinates, for holdout testing.
pub fn random_bracket_row<R: Rng>(
    rng: &mut R,
    genus: Genus,
    weight: usize,
    split: usize,
    sel: &sympder_core::SelectedMatchings,
) -> Result<(Spider, Spider, Vec<i64>), PipelineError> {
    let mut sampler = BracketSampler::new(genus, weight, rng.gen());
    let (p, q) = sampler.pair_at_split(split);
    let row = selected_profile(&spider_bracket(&p, &q)?.to_expansion(), sel)?;
    Ok((p, q, row))
}

/// Deterministic holdout sampler across genus and split ranges.
pub fn holdout_stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x686f_6c64_6f75_74)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sympder_core::select_coordinates;
    use sympder_linalg::default_primes;

    fn small_budget() -> SamplingBudget {
        SamplingBudget {
            batch_size: 32,
            stable_batches: 3,
            max_batches: 200,
        }
    }

    #[test]
    fn weight_two_bracket_image_fills_the_line() {
        // Weight 2 splits as (1, 1); the invariant space is one-dimensional
        // and brackets of weight-1 spiders already span it, so the matrix
        // reaches full rank 1 and the quotient there is zero.
        let g = Genus::new(2).unwrap();
        let cs = select_coordinates(g, 2, 5, &small_budget(), default_primes()).unwrap();
        assert_eq!(cs.rank, 1);
        let w = build_w_matrix(&cs, g, 9, &small_budget(), default_primes()).unwrap();
        assert_eq!(w.ncols, 1);
        assert_eq!(w.rank, 1);
    }

    #[test]
    fn rows_are_independent_and_match_generators() {
        let g = Genus::new(2).unwrap();
        let cs = select_coordinates(g, 4, 5, &small_budget(), default_primes()).unwrap();
        let w = build_w_matrix(&cs, g, 9, &small_budget(), default_primes()).unwrap();
        assert_eq!(w.rows.len(), w.rank);
        assert_eq!(w.rank_under(default_primes()[0]), w.rank);
        let sel = cs.selected().unwrap();
        for (row, [ps, qs]) in w.rows.iter().zip(&w.generators) {
            let p: Spider = ps.parse().unwrap();
            let q: Spider = qs.parse().unwrap();
            let again =
                selected_profile(&spider_bracket(&p, &q).unwrap().to_expansion(), &sel).unwrap();
            assert_eq!(&again, row);
        }
    }

    #[test]
    fn build_is_deterministic() {
        let g = Genus::new(2).unwrap();
        let cs = select_coordinates(g, 4, 5, &small_budget(), default_primes()).unwrap();
        let w1 = build_w_matrix(&cs, g, 9, &small_budget(), default_primes()).unwrap();
        let w2 = build_w_matrix(&cs, g, 9, &small_budget(), default_primes()).unwrap();
        assert_eq!(w1.rows, w2.rows);
        assert_eq!(w1.generators, w2.generators);
    }

    #[test]
    fn artifact_roundtrips() {
        let g = Genus::new(2).unwrap();
        let cs = select_coordinates(g, 4, 5, &small_budget(), default_primes()).unwrap();
        let w = build_w_matrix(&cs, g, 9, &small_budget(), default_primes()).unwrap();
        let dir = std::env::temp_dir().join(format!("wmatrix-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("w.json");
        w.save(&path).unwrap();
        let back = WMatrix::load(&path).unwrap();
        assert_eq!(back.rows, w.rows);
        assert_eq!(back.rank, w.rank);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
