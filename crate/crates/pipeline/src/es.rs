//! The trace map to cyclic coinvariants and its factorization check.
//!
//! `es_apply` contracts the first two tensor slots with `μ` and reads the
//! remaining degree-k word in chord-diagram coordinates: one functional per
//! rotation class of matchings, evaluated as a sum over the full rotation
//! group. Summing over the group rather than the orbit keeps the functional
//! well defined when a rotation stabilizes a diagram while flipping chord
//! orientations — such classes cancel to the zero functional, which is why
//! the classes can span less than their count.

use num::{BigInt, Integer, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sympder_core::matching::{chord_classes, matchings_count, Matching};
use sympder_core::{
    matching_profile, mu_sign, CoordinateSystem, CoreError, Expansion, Genus, Letter,
    SamplingBudget, TensorMonomial,
};
use sympder_linalg::modp::reduce_i64;
use sympder_linalg::{nullspace_mod, rank_mod, IncrementalEchelon, SparseMatrixMod};

use crate::cocycle::Cocycle;
use crate::error::PipelineError;

/// Chord-diagram coordinates for degree-`points` words: each rotation class
/// of matchings, expanded into the (rank, sign) pairs its group sum visits.
#[derive(Debug, Clone)]
pub struct ChordClassTable {
    points: usize,
    class_ids: Vec<u64>,
    orbits: Vec<Vec<(u32, i64)>>,
}

impl ChordClassTable {
    pub fn new(points: usize) -> Result<Self, PipelineError> {
        let class_ids = chord_classes(points);
        let mut orbits = Vec::with_capacity(class_ids.len());
        for &id in &class_ids {
            let rep = Matching::unrank(points, id).map_err(PipelineError::Core)?;
            let mut terms = Vec::with_capacity(points);
            for j in 0..points {
                let perm: Vec<u8> = (0..points).map(|p| ((p + j) % points) as u8).collect();
                let (m, sign) = rep.transported(&perm);
                terms.push((m.rank() as u32, sign));
            }
            orbits.push(terms);
        }
        Ok(ChordClassTable {
            points,
            class_ids,
            orbits,
        })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Number of rotation classes (not all of them survive as functionals).
    pub fn len(&self) -> usize {
        self.class_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_ids.is_empty()
    }

    pub fn class_ids(&self) -> &[u64] {
        &self.class_ids
    }

    /// Fold a dense matching profile into one value per class.
    pub fn apply_profile(&self, dense: &[i64]) -> Vec<i64> {
        debug_assert_eq!(dense.len(), matchings_count(self.points) as usize);
        let mut out = Vec::with_capacity(self.orbits.len());
        for orbit in &self.orbits {
            let mut acc: i64 = 0;
            for &(r, s) in orbit {
                let term = dense[r as usize].checked_mul(s).expect("class value overflow");
                acc = acc.checked_add(term).expect("class value overflow");
            }
            out.push(acc);
        }
        out
    }
}

/// Contract slots 0 and 1 by `μ`, then read the degree-k remainder in chord
/// coordinates.
pub fn es_apply(e: &Expansion, table: &ChordClassTable) -> Result<Vec<i64>, PipelineError> {
    if e.degree() != table.points + 2 {
        return Err(PipelineError::Core(CoreError::DegreeMismatch {
            expected: table.points + 2,
            got: e.degree(),
        }));
    }
    let mut raw: Vec<(u128, i64)> = Vec::new();
    for (m, c) in e.monomials() {
        let (l0, rest) = m.split_first();
        let (l1, tail) = rest.split_first();
        let s = mu_sign(l0, l1);
        if s != 0 {
            raw.push((tail.packed(), c * s));
        }
    }
    let reduced = Expansion::from_raw(table.points, raw);
    let mut dense = vec![0i64; matchings_count(table.points) as usize];
    for (rank, v) in matching_profile(&reduced).map_err(PipelineError::Core)? {
        dense[rank as usize] = v;
    }
    Ok(table.apply_profile(&dense))
}

/// Chord-coordinate rows for every spider of the coordinate system.
pub fn es_matrix(
    cs: &CoordinateSystem,
    table: &ChordClassTable,
) -> Result<Vec<Vec<i64>>, PipelineError> {
    let mut rows = Vec::with_capacity(cs.rank);
    for i in 0..cs.rank {
        let spider = cs.spider(i).map_err(PipelineError::Core)?;
        rows.push(es_apply(&spider.expand(), table)?);
    }
    Ok(rows)
}

fn sparse_from_rows(rows: &[Vec<i64>], ncols: usize, p: u64) -> SparseMatrixMod {
    let mut m = SparseMatrixMod::new(ncols, p);
    for row in rows {
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

/// Rank of an integer row set, certified under two primes.
pub fn certified_rank(
    rows: &[Vec<i64>],
    ncols: usize,
    primes: [u64; 2],
) -> Result<usize, PipelineError> {
    let r0 = rank_mod(&sparse_from_rows(rows, ncols, primes[0]));
    let r1 = rank_mod(&sparse_from_rows(rows, ncols, primes[1]));
    if r0 != r1 {
        return Err(PipelineError::RankCertification {
            prime: primes[1],
            got: r1,
            expected: r0,
        });
    }
    Ok(r0)
}

/// Dimension of the span of the chord-class functionals at a given genus:
/// sample balanced words until the rank of their class-value vectors
/// stabilizes, then certify with the second prime.
pub fn chord_span_rank(
    genus: Genus,
    table: &ChordClassTable,
    seed: u64,
    budget: &SamplingBudget,
    primes: [u64; 2],
) -> Result<usize, PipelineError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ech = IncrementalEchelon::new(table.len(), primes[0]);
    let mut kept: Vec<Vec<i64>> = Vec::new();
    let mut stable = 0;
    for batch in 1..=budget.max_batches {
        let before = ech.rank();
        for _ in 0..budget.batch_size {
            let word = random_balanced_word(&mut rng, genus, table.points);
            let e = Expansion::from_raw(table.points, vec![(word.packed(), 1)]);
            let mut dense = vec![0i64; matchings_count(table.points) as usize];
            for (rank, v) in matching_profile(&e).map_err(PipelineError::Core)? {
                dense[rank as usize] = v;
            }
            let row = table.apply_profile(&dense);
            let entries: Vec<(u32, i64)> = row
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(j, &v)| (j as u32, v))
                .collect();
            if ech.insert(&entries).is_some() {
                kept.push(row);
            }
        }
        stable = if ech.rank() == before { stable + 1 } else { 0 };
        if stable >= budget.stable_batches || ech.rank() == table.len() {
            break;
        }
        if batch == budget.max_batches {
            return Err(PipelineError::Core(CoreError::Unstabilized {
                lower_bound: ech.rank(),
                batches: batch,
            }));
        }
    }
    let certified = rank_mod(&sparse_from_rows(&kept, table.len(), primes[1]));
    if certified != ech.rank() {
        return Err(PipelineError::RankCertification {
            prime: primes[1],
            got: certified,
            expected: ech.rank(),
        });
    }
    Ok(ech.rank())
}

fn random_balanced_word<R: Rng>(rng: &mut R, genus: Genus, degree: usize) -> TensorMonomial {
    let n = 2 * genus.get() as u8;
    loop {
        let letters: Vec<Letter> = (0..degree)
            .map(|_| Letter::from_code(rng.gen_range(0..n)))
            .collect();
        let mut counts = [0i32; 64];
        for l in &letters {
            counts[l.code() as usize] += 1;
        }
        if counts.chunks_exact(2).all(|c| c[0] == c[1]) {
            return TensorMonomial::from_letters(&letters).expect("degree bounded by caller");
        }
    }
}

/// Result of the factorization check.
#[derive(Debug, Clone)]
pub struct FactorizationOutcome {
    /// Dimension of the left kernel of the trace matrix, per prime.
    pub kernel_dim: usize,
    /// Kernel basis vectors on which the cocycle was checked (both primes).
    pub checked: usize,
    pub cocycle_vanishes_on_kernel: bool,
    /// A random non-kernel combination evaluated nonzero under the cocycle.
    pub mutation_nonzero: bool,
}

/// The cocycle, as a functional on spider combinations, must vanish on the
/// left kernel of the trace matrix — that is the factorization through the
/// trace image. Checked modulo both primes on a full kernel basis, with a
/// random non-kernel control expected nonzero.
pub fn es_factorization_check(
    cocycle: &Cocycle,
    cs: &CoordinateSystem,
    es_rows: &[Vec<i64>],
    table: &ChordClassTable,
    primes: [u64; 2],
    seed: u64,
) -> Result<FactorizationOutcome, PipelineError> {
    // γ_i = cocycle value on coordinate spider i, exactly.
    let minor = cs.pairing_minor().map_err(PipelineError::Core)?;
    let gamma: Vec<BigInt> = minor
        .iter()
        .map(|row| {
            let mut acc = BigInt::zero();
            for (k, &v) in cocycle.kernel().iter().zip(row) {
                if v != 0 {
                    acc += k * BigInt::from(v);
                }
            }
            acc
        })
        .collect();

    let mut kernel_dim = None;
    let mut checked = 0;
    for p in primes {
        let gamma_p: Vec<u64> = gamma
            .iter()
            .map(|g| {
                let r = g.mod_floor(&BigInt::from(p));
                num::ToPrimitive::to_u64(&r).expect("residue fits u64")
            })
            .collect();
        // Left kernel of the trace matrix = nullspace of its transpose.
        let ncols = cs.rank;
        let mut transposed = SparseMatrixMod::new(ncols, p);
        for j in 0..table.len() {
            let entries: Vec<(u32, i64)> = es_rows
                .iter()
                .enumerate()
                .filter(|(_, row)| row[j] != 0)
                .map(|(i, row)| (i as u32, row[j]))
                .collect();
            transposed.push_row_i64(&entries);
        }
        let basis = nullspace_mod(&transposed);
        match kernel_dim {
            None => kernel_dim = Some(basis.len()),
            Some(d) if d == basis.len() => {}
            Some(d) => {
                return Err(PipelineError::RankCertification {
                    prime: p,
                    got: basis.len(),
                    expected: d,
                });
            }
        }
        for x in &basis {
            let mut acc: u128 = 0;
            for (xi, gp) in x.iter().zip(&gamma_p) {
                if *xi != 0 {
                    acc = (acc + sympder_linalg::modp::mulmod(*xi, *gp, p) as u128) % p as u128;
                }
            }
            if acc != 0 {
                return Ok(FactorizationOutcome {
                    kernel_dim: kernel_dim.unwrap(),
                    checked,
                    cocycle_vanishes_on_kernel: false,
                    mutation_nonzero: false,
                });
            }
            checked += 1;
        }
    }

    // Control: a random combination outside the kernel should not vanish.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6573_636b);
    let mut mutation_nonzero = false;
    'attempts: for _ in 0..32 {
        let x: Vec<i64> = (0..cs.rank).map(|_| rng.gen_range(-4..=4)).collect();
        // Outside the kernel: its trace-coordinate image must be nonzero.
        let mut image_nonzero = false;
        'cols: for j in 0..table.len() {
            let mut acc: i128 = 0;
            for (xi, row) in x.iter().zip(es_rows) {
                acc += *xi as i128 * row[j] as i128;
            }
            if acc != 0 {
                image_nonzero = true;
                break 'cols;
            }
        }
        if !image_nonzero {
            continue;
        }
        for p in primes {
            let mut acc: u128 = 0;
            for (xi, g) in x.iter().zip(&gamma) {
                if *xi != 0 {
                    let gp = num::ToPrimitive::to_u64(&g.mod_floor(&BigInt::from(p)))
                        .expect("residue fits u64");
                    acc = (acc + sympder_linalg::modp::mulmod(reduce_i64(*xi, p), gp, p) as u128)
                        % p as u128;
                }
            }
            if acc != 0 {
                mutation_nonzero = true;
                break 'attempts;
            }
        }
    }

    Ok(FactorizationOutcome {
        kernel_dim: kernel_dim.unwrap_or(0),
        checked,
        cocycle_vanishes_on_kernel: true,
        mutation_nonzero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_class_tables_have_the_burnside_counts() {
        assert_eq!(ChordClassTable::new(2).unwrap().len(), 1);
        assert_eq!(ChordClassTable::new(4).unwrap().len(), 2);
        assert_eq!(ChordClassTable::new(6).unwrap().len(), 5);
    }

    #[test]
    fn the_single_two_point_class_dies_under_rotation() {
        // a1 ⊗ b1 ⊗ w contributes the class functional of w = a2 ⊗ b2. On
        // two points the unique chord is stabilized by the half-turn, which
        // flips its orientation: the group sum is contract(w) − contract(w)
        // = 0. This mirrors the coinvariant fact that the antisymmetric
        // invariant of H ⊗ H dies in Z/2-coinvariants.
        let table = ChordClassTable::new(2).unwrap();
        let word = TensorMonomial::from_letters(&[
            Letter::a(1),
            Letter::b(1),
            Letter::a(2),
            Letter::b(2),
        ])
        .unwrap();
        let e = Expansion::from_raw(4, vec![(word.packed(), 1)]);
        let values = es_apply(&e, &table).unwrap();
        assert_eq!(values.len(), 1);
        assert_eq!(values[0], 0);
        assert_eq!(table.orbits[0], vec![(0, 1), (0, -1)]);
    }

    #[test]
    fn one_kind_monomials_trace_to_zero() {
        let table = ChordClassTable::new(2).unwrap();
        let word = TensorMonomial::from_letters(&[
            Letter::a(1),
            Letter::a(1),
            Letter::a(2),
            Letter::a(2),
        ])
        .unwrap();
        let e = Expansion::from_raw(4, vec![(word.packed(), 1)]);
        assert!(es_apply(&e, &table).unwrap().iter().all(|&v| v == 0));
    }

    #[test]
    fn mu_vanishing_head_contributes_nothing() {
        let table = ChordClassTable::new(2).unwrap();
        // Head slots a1 ⊗ a2: μ = 0, so the whole term drops.
        let word = TensorMonomial::from_letters(&[
            Letter::a(1),
            Letter::a(2),
            Letter::a(3),
            Letter::b(3),
        ])
        .unwrap();
        let e = Expansion::from_raw(4, vec![(word.packed(), 1)]);
        assert!(es_apply(&e, &table).unwrap().iter().all(|&v| v == 0));
    }

    #[test]
    fn group_sum_kills_orientation_flipping_classes_only() {
        // On 4 points: the parallel class {(0,1),(2,3)} is stabilized by the
        // half-turn with sign +1, so its functional is 2·[rank 0] − 2·[rank
        // 2]; the crossing class {(0,2),(1,3)} is stabilized by the quarter
        // turn with sign −1 and its functional collapses to zero.
        let table = ChordClassTable::new(4).unwrap();
        assert_eq!(table.class_ids(), &[0, 1]);
        assert_eq!(table.apply_profile(&[1, 0, 0]), vec![2, 0]);
        assert_eq!(table.apply_profile(&[0, 1, 0]), vec![0, 0]);
        assert_eq!(table.apply_profile(&[0, 0, 1]), vec![-2, 0]);
    }
}
