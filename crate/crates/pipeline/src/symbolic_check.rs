//! Symbolic verification of the cocycle identity, one split at a time.
//!
//! For a split `i` of the weight, take formal spiders `S(u_1..u_{i+2})` and
//! `S(v_1..v_{w+2-i})` and expand their bracket with every `μ` left as a
//! formal symbol. Pairing the cocycle coefficients against the symbolic
//! contractions gives a polynomial in the `μ(x, y)`; the cocycle property
//! for every genus at once is the statement that this polynomial is zero.
//!
//! The inner loop avoids symbolic allocation entirely: a bracket term is a
//! permutation of the surviving symbols, so contracting it against a slot
//! matching just transports the matching onto the symbols. Accumulation
//! happens in a dense table indexed by the rank of the transported matching,
//! with `i128` entries — sound because coefficients are bounded up front.

use std::collections::HashMap;

use num::BigRational;
use serde::{Deserialize, Serialize};
use sympder_core::matching::{matchings_count, rank_of_partners, Matching};
use sympder_core::{
    CoreError, Letter, MuMonomial, MuPolynomial, SelectedMatchings, Spider, Splice,
};

use crate::cocycle::Cocycle;
use crate::error::PipelineError;

/// Widest coefficient (in bits) the dense `i128` accumulator can take while
/// staying provably overflow-free; wider kernels need a different backend.
pub const KERNEL_BIT_LIMIT: u64 = 100;

/// Outcome of one split: the polynomial and how big it stayed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitReport {
    pub split: usize,
    pub is_zero: bool,
    pub monomials: usize,
}

/// The symbolic bracket pairing for one split, with the cocycle's own
/// normalization. Specializing formal symbols to basis letters reproduces
/// the numeric evaluation on the corresponding bracket.
pub fn symbolic_bracket_polynomial(
    cocycle: &Cocycle,
    split: usize,
) -> Result<MuPolynomial, PipelineError> {
    let weight = cocycle.artifact().weight;
    let kernel = kernel_as_i128(cocycle)?;
    symbolic_polynomial_raw(&kernel, &cocycle.scale(), cocycle.selected(), weight, split)
}

/// True iff the symbolic pairing for this split is the zero polynomial.
pub fn verify_cocycle_symbolic(cocycle: &Cocycle, split: usize) -> Result<bool, PipelineError> {
    Ok(symbolic_bracket_polynomial(cocycle, split)?.is_zero())
}

pub fn kernel_as_i128(cocycle: &Cocycle) -> Result<Vec<i128>, PipelineError> {
    let mut out = Vec::with_capacity(cocycle.kernel().len());
    for v in cocycle.kernel() {
        if v.bits() > KERNEL_BIT_LIMIT {
            return Err(PipelineError::Artifact(format!(
                "kernel entry needs {} bits; the symbolic accumulator supports {}",
                v.bits(),
                KERNEL_BIT_LIMIT
            )));
        }
        out.push(num::ToPrimitive::to_i128(v).expect("bounded by the bit check"));
    }
    Ok(out)
}

/// Low-level driver: coefficients are a raw integer vector over `sel`'s
/// columns and `scale` multiplies the final polynomial.
pub fn symbolic_polynomial_raw(
    kernel: &[i128],
    scale: &BigRational,
    sel: &SelectedMatchings,
    weight: usize,
    split: usize,
) -> Result<MuPolynomial, PipelineError> {
    if split == 0 || split > weight / 2 {
        return Err(PipelineError::Artifact(format!(
            "split {split} out of range 1..={}",
            weight / 2
        )));
    }
    if kernel.len() != sel.len() {
        return Err(PipelineError::Artifact(format!(
            "{} coefficients over {} columns",
            kernel.len(),
            sel.len()
        )));
    }
    let alpha = split + 2;
    let beta = weight + 2 - split;
    let points = weight + 2;
    debug_assert_eq!(sel.points(), points);

    // Formal symbols are letter codes 0..alpha+beta; keep within the packed
    // alphabet.
    if alpha + beta > 32 {
        return Err(PipelineError::Artifact(
            "weight too large for formal symbol alphabet".into(),
        ));
    }
    let p_legs: Vec<Letter> = (0..alpha).map(|c| Letter::from_code(c as u8)).collect();
    let q_legs: Vec<Letter> = (alpha..alpha + beta)
        .map(|c| Letter::from_code(c as u8))
        .collect();
    let p = Spider::new(p_legs).map_err(PipelineError::Core)?;
    let q = Spider::new(q_legs).map_err(PipelineError::Core)?;

    let columns: Vec<(i128, Vec<(u8, u8)>)> = (0..sel.len())
        .filter(|&col| kernel[col] != 0)
        .map(|col| (kernel[col], sel.matching(col).pairs().to_vec()))
        .collect();

    let table_size = matchings_count(points) as usize;
    let mut table = vec![0i128; table_size];
    let mut acc: HashMap<Vec<(u8, u8)>, i128> = HashMap::new();

    for i_leg in 0..alpha {
        for l_leg in 0..beta {
            let splice = Splice::new(p.clone(), i_leg, q.clone(), l_leg)?;
            let expansion = splice.expand();
            // Permutation words over the surviving symbols, as code arrays.
            let terms: Vec<(Vec<u8>, i64)> = expansion
                .monomials()
                .map(|(m, c)| {
                    let codes: Vec<u8> = (0..points).map(|s| m.letter(s).code()).collect();
                    (codes, c)
                })
                .collect();
            // Compact the surviving codes to 0..points, monotonically.
            let mut survivors: Vec<u8> = (0..(alpha + beta) as u8)
                .filter(|&c| c != i_leg as u8 && c != (alpha + l_leg) as u8)
                .collect();
            survivors.sort_unstable();
            let mut compact = [255u8; 32];
            for (ci, &code) in survivors.iter().enumerate() {
                compact[code as usize] = ci as u8;
            }

            table.iter_mut().for_each(|v| *v = 0);
            let mut partner = vec![0u8; points];
            for (c_m, pairs) in &columns {
                for (codes, coeff) in &terms {
                    let mut sign = *coeff as i128;
                    for &(s, t) in pairs {
                        let x = codes[s as usize];
                        let y = codes[t as usize];
                        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
                        if x > y {
                            sign = -sign;
                        }
                        let ci = compact[lo as usize];
                        let cj = compact[hi as usize];
                        partner[ci as usize] = cj;
                        partner[cj as usize] = ci;
                    }
                    let r = rank_of_partners(&partner) as usize;
                    table[r] += sign * c_m;
                }
            }

            // Fold nonzero slots into the running polynomial, prefixed by
            // the formal μ(u_{i_leg}, v_{l_leg}).
            let prefactor = (i_leg as u8, (alpha + l_leg) as u8);
            for (r, &v) in table.iter().enumerate() {
                if v == 0 {
                    continue;
                }
                let m = Matching::unrank(points, r as u64).map_err(PipelineError::Core)?;
                let mut key: Vec<(u8, u8)> = Vec::with_capacity(points / 2 + 1);
                let mut inserted = false;
                for &(ci, cj) in m.pairs() {
                    let pair = (survivors[ci as usize], survivors[cj as usize]);
                    if !inserted && prefactor.0 < pair.0 {
                        key.push(prefactor);
                        inserted = true;
                    }
                    key.push(pair);
                }
                if !inserted {
                    key.push(prefactor);
                }
                *acc.entry(key).or_insert(0) += v;
            }
            acc.retain(|_, v| *v != 0);
        }
    }

    let mut poly = MuPolynomial::zero();
    for (pairs, value) in acc {
        if value == 0 {
            continue;
        }
        let (mono, sign) = MuMonomial::new(&pairs);
        debug_assert_eq!(sign, 1, "keys are canonical already");
        poly.add_term(
            mono,
            BigRational::from(num::BigInt::from(value * sign as i128)) * scale,
        );
    }
    Ok(poly)
}

/// Direct (slow) recomputation used as an oracle in tests: every bracket
/// term is contracted symbolically through the core primitives.
pub fn symbolic_polynomial_direct(
    kernel: &[i128],
    scale: &BigRational,
    sel: &SelectedMatchings,
    weight: usize,
    split: usize,
) -> Result<MuPolynomial, PipelineError> {
    let alpha = split + 2;
    let beta = weight + 2 - split;
    let points = weight + 2;
    let p = Spider::new((0..alpha).map(|c| Letter::from_code(c as u8)).collect())
        .map_err(PipelineError::Core)?;
    let q = Spider::new(
        (alpha..alpha + beta)
            .map(|c| Letter::from_code(c as u8))
            .collect(),
    )
    .map_err(PipelineError::Core)?;
    let mut poly = MuPolynomial::zero();
    for i_leg in 0..alpha {
        for l_leg in 0..beta {
            let splice = Splice::new(p.clone(), i_leg, q.clone(), l_leg)?;
            let expansion = splice.expand();
            let prefactor = (i_leg as u8, (alpha + l_leg) as u8);
            for col in 0..sel.len() {
                if kernel[col] == 0 {
                    continue;
                }
                let m = sel.matching(col);
                for (mono, coeff) in expansion.monomials() {
                    let codes: Vec<u8> = (0..points).map(|s| mono.letter(s).code()).collect();
                    let single = sympder_core::symbolic_contract(&codes, &m)
                        .map_err(PipelineError::Core)?;
                    for (factors, c) in single.iter() {
                        let mut pairs = factors.factors().to_vec();
                        pairs.push(prefactor);
                        let (full, sign) = MuMonomial::new(&pairs);
                        let w = BigRational::from(num::BigInt::from(
                            sign as i128 * coeff as i128 * kernel[col],
                        ));
                        poly.add_term(full, w * c * scale);
                    }
                }
            }
        }
    }
    Ok(poly)
}

#[allow(dead_code)]
fn core_error(e: CoreError) -> PipelineError {
    PipelineError::Core(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use num::Zero;
    use sympder_core::{selected_profile, spider_bracket, Genus};

    fn all_columns(points: usize) -> SelectedMatchings {
        let n = matchings_count(points);
        SelectedMatchings::new(points, (0..n as u32).collect()).unwrap()
    }

    #[test]
    fn fast_path_matches_direct_symbolic_expansion() {
        let sel = all_columns(6);
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let kernel: Vec<i128> = (0..sel.len()).map(|_| rng.gen_range(-3..=3)).collect();
        let scale = BigRational::one();
        for split in 1..=2 {
            let fast = symbolic_polynomial_raw(&kernel, &scale, &sel, 4, split).unwrap();
            let slow = symbolic_polynomial_direct(&kernel, &scale, &sel, 4, split).unwrap();
            assert_eq!(fast, slow, "split {split}");
        }
    }

    #[test]
    fn specialization_matches_numeric_bracket_pairing() {
        let g = Genus::new(2).unwrap();
        let sel = all_columns(6);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let kernel: Vec<i128> = (0..sel.len()).map(|_| rng.gen_range(-5..=5)).collect();
        let scale = BigRational::new(num::BigInt::from(3), num::BigInt::from(7));
        for split in 1..=2 {
            let poly = symbolic_polynomial_raw(&kernel, &scale, &sel, 4, split).unwrap();
            for _ in 0..5 {
                let assignment: Vec<Letter> = (0..8)
                    .map(|_| Letter::from_code(rng.gen_range(0..2 * g.get() as u8)))
                    .collect();
                let alpha = split + 2;
                let p = Spider::new(assignment[..alpha].to_vec()).unwrap();
                let q = Spider::new(assignment[alpha..].to_vec()).unwrap();
                let bracket = spider_bracket(&p, &q).unwrap();
                let profile = selected_profile(&bracket.to_expansion(), &sel).unwrap();
                let mut numeric = BigRational::zero();
                for (j, &v) in profile.iter().enumerate() {
                    if v != 0 {
                        numeric += BigRational::from(num::BigInt::from(kernel[j]))
                            * BigRational::from(num::BigInt::from(v));
                    }
                }
                numeric *= &scale;
                assert_eq!(poly.specialize(&assignment), numeric);
            }
        }
    }

    #[test]
    fn rejects_out_of_range_split() {
        let sel = all_columns(4);
        let kernel = vec![1i128; sel.len()];
        let err = symbolic_polynomial_raw(&kernel, &BigRational::one(), &sel, 2, 2).unwrap_err();
        assert!(matches!(err, PipelineError::Artifact(_)));
    }

    #[test]
    fn unrank_pairs_round_trip_through_codes() {
        // The fold step relies on unrank producing ascending canonical pairs.
        for r in 0..15 {
            let m = Matching::unrank(6, r).unwrap();
            let pairs = m.pairs();
            for w in pairs.windows(2) {
                assert!(w[0].0 < w[1].0);
            }
            for &(a, b) in pairs {
                assert!(a < b);
            }
        }
    }
}
