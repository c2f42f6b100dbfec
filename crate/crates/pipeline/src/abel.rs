//! Abelianization dimensions, including the sampling-free small-weight
//! pipelines used to cross-check the sampled ones.
//!
//! The abelianization in a given weight is the invariant piece modulo the
//! image of the bracket, so its dimension is `rank(coordinates) − rank(W)`.
//! For weights 2 and 4 the whole computation is repeated by enumerating
//! every spider and every bracket pair over the full alphabet — no sampling
//! anywhere — which pins the sampled ranks exactly.

use std::collections::HashMap;

use sympder_core::{
    matching_profile, spider_bracket, CoordinateSystem, CoreError, Genus, Letter, Spider,
};
use sympder_linalg::IncrementalEchelon;

use crate::error::PipelineError;
use crate::wmatrix::WMatrix;

/// `dim 𝔥(w)^Sp − rank W`, both sides coming from certified artifacts.
pub fn abelianization_dim(cs: &CoordinateSystem, w: &WMatrix) -> Result<usize, PipelineError> {
    if w.ncols != cs.rank || w.weight != cs.weight {
        return Err(PipelineError::Artifact(format!(
            "bracket matrix over {} columns at weight {}, coordinates have rank {} at weight {}",
            w.ncols, w.weight, cs.rank, cs.weight
        )));
    }
    Ok(cs.rank - w.rank)
}

/// Visit every code tuple of the given length over `0..n`, odometer order,
/// reusing one buffer. The visitor can abort with an error.
fn stream_tuples<F>(n: u8, legs: usize, mut visit: F) -> Result<(), PipelineError>
where
    F: FnMut(&[u8]) -> Result<(), PipelineError>,
{
    let mut codes = vec![0u8; legs];
    loop {
        visit(&codes)?;
        let mut slot = 0;
        loop {
            if slot == legs {
                return Ok(());
            }
            codes[slot] += 1;
            if codes[slot] < n {
                break;
            }
            codes[slot] = 0;
            slot += 1;
        }
    }
}

/// Per-index surplus of `a` letters over `b` letters. Two tuples combine to
/// a balanced leg multiset exactly when their signatures cancel.
fn signature(codes: &[u8]) -> [i8; 16] {
    let mut sig = [0i8; 16];
    for &c in codes {
        let pair = (c >> 1) as usize;
        if c & 1 == 0 {
            sig[pair] += 1;
        } else {
            sig[pair] -= 1;
        }
    }
    sig
}

fn negated(mut sig: [i8; 16]) -> [i8; 16] {
    for d in sig.iter_mut() {
        *d = -*d;
    }
    sig
}

/// Bit `c` set when letter code `c` occurs.
fn presence_mask(codes: &[u8]) -> u32 {
    codes.iter().fold(0u32, |m, &c| m | (1 << c))
}

/// Bit `c` set when the partner of some occurring letter has code `c`; two
/// tuples are joinable exactly when this mask meets the other's presence.
fn partner_mask(codes: &[u8]) -> u32 {
    codes.iter().fold(0u32, |m, &c| m | (1 << (c ^ 1)))
}

fn balanced_codes(codes: &[u8]) -> bool {
    signature(codes) == [0i8; 16]
}

fn spider_from_codes(codes: &[u8]) -> Result<Spider, PipelineError> {
    let legs: Vec<Letter> = codes.iter().map(|&c| Letter::from_code(c)).collect();
    Spider::new(legs).map_err(PipelineError::Core)
}

/// Rank of the full spider-versus-matching pairing at a weight, by
/// enumerating every spider over the alphabet. Certified under two primes.
pub fn full_invariant_rank(
    genus: Genus,
    weight: usize,
    primes: [u64; 2],
) -> Result<usize, PipelineError> {
    let legs = weight + 2;
    let ncols = sympder_core::matching::matchings_count(legs) as usize;
    let mut ech: Vec<IncrementalEchelon> = primes
        .iter()
        .map(|&p| IncrementalEchelon::new(ncols, p))
        .collect();
    stream_tuples(2 * genus.get() as u8, legs, |codes| {
        if !balanced_codes(codes) {
            return Ok(());
        }
        let spider = spider_from_codes(codes)?;
        let row = matching_profile(&spider.expand()).map_err(PipelineError::Core)?;
        let entries: Vec<(u32, i64)> = row.iter().map(|&(r, v)| (r, v)).collect();
        let ranks: Vec<Option<u32>> = ech.iter_mut().map(|e| e.insert(&entries)).collect();
        if ranks[0].is_some() != ranks[1].is_some() {
            return Err(PipelineError::RankCertification {
                prime: primes[1],
                got: ech[1].rank(),
                expected: ech[0].rank(),
            });
        }
        Ok(())
    })?;
    if ech[0].rank() != ech[1].rank() {
        return Err(PipelineError::RankCertification {
            prime: primes[1],
            got: ech[1].rank(),
            expected: ech[0].rank(),
        });
    }
    Ok(ech[0].rank())
}

/// Rank of the full bracket image at a weight, by enumerating every pair of
/// spiders across every split. Certified under two primes.
pub fn full_bracket_rank(
    genus: Genus,
    weight: usize,
    primes: [u64; 2],
) -> Result<usize, PipelineError> {
    let n = 2 * genus.get() as u8;
    let ncols = sympder_core::matching::matchings_count(weight + 2) as usize;
    let mut ech: Vec<IncrementalEchelon> = primes
        .iter()
        .map(|&p| IncrementalEchelon::new(ncols, p))
        .collect();
    for split in 1..=weight / 2 {
        let p_legs = split + 2;
        let q_legs = weight - split + 2;

        // Index the small side by signature so the big side streams once and
        // touches only balance-compatible partners.
        let mut by_sig: HashMap<[i8; 16], Vec<(Vec<u8>, u32)>> = HashMap::new();
        stream_tuples(n, p_legs, |codes| {
            by_sig
                .entry(signature(codes))
                .or_default()
                .push((codes.to_vec(), partner_mask(codes)));
            Ok(())
        })?;

        stream_tuples(n, q_legs, |q_codes| {
            let Some(partners) = by_sig.get(&negated(signature(q_codes))) else {
                return Ok(());
            };
            let q_mask = presence_mask(q_codes);
            let mut q_spider: Option<Spider> = None;
            for (p_codes, p_partners) in partners {
                if p_partners & q_mask == 0 {
                    continue;
                }
                let q = match &q_spider {
                    Some(q) => q,
                    None => {
                        q_spider = Some(spider_from_codes(q_codes)?);
                        q_spider.as_ref().unwrap()
                    }
                };
                let p = spider_from_codes(p_codes)?;
                let bracket = spider_bracket(&p, q).map_err(PipelineError::Core)?;
                let row =
                    matching_profile(&bracket.to_expansion()).map_err(PipelineError::Core)?;
                if row.is_empty() {
                    continue;
                }
                let entries: Vec<(u32, i64)> = row.iter().map(|&(r, v)| (r, v)).collect();
                for e in ech.iter_mut() {
                    e.insert(&entries);
                }
            }
            Ok(())
        })?;
    }
    if ech[0].rank() != ech[1].rank() {
        return Err(PipelineError::RankCertification {
            prime: primes[1],
            got: ech[1].rank(),
            expected: ech[0].rank(),
        });
    }
    Ok(ech[0].rank())
}

/// Odd tensor powers have no invariants, so odd weights contribute nothing.
pub fn odd_weight_dim(genus: Genus, weight: usize) -> Result<usize, PipelineError> {
    if weight % 2 == 0 {
        return Err(PipelineError::Artifact(format!(
            "weight {weight} is even; this check is for odd weights"
        )));
    }
    match sympder_core::select_coordinates(
        genus,
        weight,
        1,
        &sympder_core::SamplingBudget::default(),
        sympder_linalg::default_primes(),
    ) {
        Ok(cs) => Ok(cs.rank),
        Err(CoreError::OddWeight(_)) => Ok(0),
        Err(e) => Err(PipelineError::Core(e)),
    }
}
