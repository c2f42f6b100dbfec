//! Sparse Gaussian elimination with Markowitz pivoting, and a fraction-free
//! Bareiss rank for exact cross-checks.

use crate::error::LinalgError;
use crate::modp::{invmod, mulmod, submod};
use crate::rational::{BigInt, Rational};
use crate::sparse::{SparseMatrixMod, SparseMatrixQ};
use num::{Integer, One, Zero};

trait Field {
    type El: Clone + PartialEq + std::fmt::Debug;
    fn inv(&self, a: &Self::El) -> Self::El;
    fn mul(&self, a: &Self::El, b: &Self::El) -> Self::El;
    /// a - b*c
    fn sub_mul(&self, a: Option<&Self::El>, b: &Self::El, c: &Self::El) -> Self::El;
    fn is_zero(a: &Self::El) -> bool;
}

struct QField;

impl Field for QField {
    type El = Rational;
    fn inv(&self, a: &Rational) -> Rational {
        a.recip()
    }
    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        a * b
    }
    fn sub_mul(&self, a: Option<&Rational>, b: &Rational, c: &Rational) -> Rational {
        match a {
            Some(a) => a - b * c,
            None => -(b * c),
        }
    }
    fn is_zero(a: &Rational) -> bool {
        a.is_zero()
    }
}

struct PField {
    p: u64,
}

impl Field for PField {
    type El = u64;
    fn inv(&self, a: &u64) -> u64 {
        invmod(*a, self.p)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mulmod(*a, *b, self.p)
    }
    fn sub_mul(&self, a: Option<&u64>, b: &u64, c: &u64) -> u64 {
        submod(a.copied().unwrap_or(0), mulmod(*b, *c, self.p), self.p)
    }
    fn is_zero(a: &u64) -> bool {
        *a == 0
    }
}

struct Rref<El> {
    /// (row index into `rows`, pivot column), in elimination order.
    pivots: Vec<(usize, u32)>,
    rows: Vec<Vec<(u32, El)>>,
}

/// Full reduced row echelon form.  Pivot choice minimizes the Markowitz count
/// (row_len - 1)(col_count - 1) with ties broken on (row, col).
fn rref<F: Field>(f: &F, mut rows: Vec<Vec<(u32, F::El)>>, ncols: usize) -> Rref<F::El> {
    let mut settled = vec![false; rows.len()];
    let mut col_pivoted = vec![false; ncols];
    let mut pivots = Vec::new();
    loop {
        let mut col_count = vec![0u32; ncols];
        for (r, row) in rows.iter().enumerate() {
            if settled[r] {
                continue;
            }
            for (c, _) in row {
                col_count[*c as usize] += 1;
            }
        }
        let mut best: Option<(u64, usize, u32)> = None;
        for (r, row) in rows.iter().enumerate() {
            if settled[r] || row.is_empty() {
                continue;
            }
            let rl = row.len() as u64 - 1;
            for (c, _) in row {
                debug_assert!(!col_pivoted[*c as usize]);
                let score = rl * (col_count[*c as usize] as u64 - 1);
                let cand = (score, r, *c);
                if best.map_or(true, |b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        let Some((_, pr, pc)) = best else { break };
        let pv = row_get(&rows[pr], pc).expect("pivot entry present");
        scale_row(f, &mut rows[pr], &f.inv(&pv));
        let pivot_row = rows[pr].clone();
        for r in 0..rows.len() {
            if r == pr {
                continue;
            }
            if let Some(fac) = row_get(&rows[r], pc) {
                rows[r] = axpy_sparse(f, &rows[r], &fac, &pivot_row);
            }
        }
        settled[pr] = true;
        col_pivoted[pc as usize] = true;
        pivots.push((pr, pc));
        // Settled rows keep only pivoted columns plus free columns; strip the
        // freshly cleared column lazily via axpy above, nothing else to do.
    }
    Rref { pivots, rows }
}

fn row_get<El: Clone>(row: &[(u32, El)], col: u32) -> Option<El> {
    row.binary_search_by_key(&col, |e| e.0).ok().map(|i| row[i].1.clone())
}

fn scale_row<F: Field>(f: &F, row: &mut Vec<(u32, F::El)>, s: &F::El) {
    for (_, v) in row.iter_mut() {
        *v = f.mul(v, s);
    }
}

/// target - factor * pivot, merging sorted sparse rows.
fn axpy_sparse<F: Field>(
    f: &F,
    target: &[(u32, F::El)],
    factor: &F::El,
    pivot: &[(u32, F::El)],
) -> Vec<(u32, F::El)> {
    let mut out = Vec::with_capacity(target.len() + pivot.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < pivot.len() {
        let tc = target.get(i).map(|e| e.0).unwrap_or(u32::MAX);
        let pc = pivot.get(j).map(|e| e.0).unwrap_or(u32::MAX);
        if tc < pc {
            out.push(target[i].clone());
            i += 1;
        } else if pc < tc {
            let v = f.sub_mul(None, factor, &pivot[j].1);
            if !F::is_zero(&v) {
                out.push((pc, v));
            }
            j += 1;
        } else {
            let v = f.sub_mul(Some(&target[i].1), factor, &pivot[j].1);
            if !F::is_zero(&v) {
                out.push((tc, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn kernel_from_rref<F: Field>(
    f: &F,
    rr: &Rref<F::El>,
    ncols: usize,
    zero: F::El,
    one: F::El,
) -> Vec<Vec<F::El>> {
    let mut pivot_of_col = vec![usize::MAX; ncols];
    for (r, c) in &rr.pivots {
        pivot_of_col[*c as usize] = *r;
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_of_col[free] != usize::MAX {
            continue;
        }
        let mut v: Vec<F::El> = vec![zero.clone(); ncols];
        v[free] = one.clone();
        for (r, c) in &rr.pivots {
            if let Some(a) = row_get(&rr.rows[*r], free as u32) {
                // pivot row: x_c + a * x_free + ... = 0
                v[*c as usize] = f.sub_mul(None, &a, &one);
            }
        }
        basis.push(v);
    }
    basis
}

pub fn rank_mod(m: &SparseMatrixMod) -> usize {
    let f = PField { p: m.modulus() };
    rref(&f, m.rows().to_vec(), m.ncols()).pivots.len()
}

/// Kernel basis mod p; every vector is re-verified against the matrix.
pub fn nullspace_mod(m: &SparseMatrixMod) -> Vec<Vec<u64>> {
    let f = PField { p: m.modulus() };
    let rr = rref(&f, m.rows().to_vec(), m.ncols());
    let basis = kernel_from_rref(&f, &rr, m.ncols(), 0u64, 1u64);
    for v in &basis {
        assert!(
            m.mul_vec(v).iter().all(|&x| x == 0),
            "modular kernel verification failed"
        );
    }
    basis
}

/// Exact rational rank by Gaussian elimination, guarded by a cell limit.
pub fn rank_q(m: &SparseMatrixQ, max_cells: usize) -> Result<usize, LinalgError> {
    guard(m.nrows(), m.ncols(), max_cells)?;
    let rr = rref(&QField, m.rows().to_vec(), m.ncols());
    Ok(rr.pivots.len())
}

/// Exact rational kernel basis, re-verified by multiplication.
pub fn nullspace_q(m: &SparseMatrixQ, max_cells: usize) -> Result<Vec<Vec<Rational>>, LinalgError> {
    guard(m.nrows(), m.ncols(), max_cells)?;
    let rr = rref(&QField, m.rows().to_vec(), m.ncols());
    let basis = kernel_from_rref(&QField, &rr, m.ncols(), Rational::zero(), Rational::one());
    for v in &basis {
        assert!(
            m.mul_vec(v).iter().all(Zero::is_zero),
            "exact kernel verification failed"
        );
    }
    Ok(basis)
}

fn guard(rows: usize, cols: usize, max_cells: usize) -> Result<(), LinalgError> {
    if rows.saturating_mul(cols) > max_cells {
        return Err(LinalgError::ExactSizeLimit { rows, cols, limit: max_cells });
    }
    Ok(())
}

/// Fraction-free Bareiss rank over the integers (rows are cleared of
/// denominators first; row scaling leaves rank alone).
pub fn rank_exact(m: &SparseMatrixQ, max_cells: usize) -> Result<usize, LinalgError> {
    guard(m.nrows(), m.ncols(), max_cells)?;
    let (nr, nc) = (m.nrows(), m.ncols());
    let mut a: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); nc]; nr];
    for (r, row) in m.rows().iter().enumerate() {
        let mut lcm = BigInt::one();
        for (_, v) in row {
            lcm = lcm.lcm(v.denom());
        }
        for (c, v) in row {
            a[r][*c as usize] = v.numer() * (&lcm / v.denom());
        }
    }
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut col = 0;
    while rank < nr && col < nc {
        let Some(pr) = (rank..nr).find(|&r| !a[r][col].is_zero()) else {
            col += 1;
            continue;
        };
        a.swap(rank, pr);
        for r in rank + 1..nr {
            if a[r].iter().skip(col).all(Zero::is_zero) {
                continue;
            }
            for c in col + 1..nc {
                let t = &a[r][c] * &a[rank][col] - &a[r][col] * &a[rank][c];
                let (q, rem) = t.div_rem(&prev);
                debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                a[r][c] = q;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
        col += 1;
    }
    Ok(rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modp::default_primes;
    use crate::rational::rat;
    use proptest::prelude::*;

    fn q_matrix(rows: &[&[(u32, Rational)]], ncols: usize) -> SparseMatrixQ {
        let mut m = SparseMatrixQ::new(ncols);
        for row in rows {
            m.push_row(row.to_vec());
        }
        m
    }

    #[test]
    fn identity_rank() {
        let rows: Vec<Vec<(u32, Rational)>> = (0..8).map(|i| vec![(i as u32, rat(1, 1))]).collect();
        let refs: Vec<&[(u32, Rational)]> = rows.iter().map(|r| r.as_slice()).collect();
        let m = q_matrix(&refs, 8);
        assert_eq!(rank_q(&m, 10_000).unwrap(), 8);
        assert_eq!(rank_exact(&m, 10_000).unwrap(), 8);
        let p = default_primes()[0];
        assert_eq!(rank_mod(&m.to_mod(p).unwrap()), 8);
    }

    #[test]
    fn zero_matrix_rank() {
        let mut m = SparseMatrixQ::new(5);
        for _ in 0..3 {
            m.push_row(vec![]);
        }
        assert_eq!(rank_q(&m, 10_000).unwrap(), 0);
        assert_eq!(nullspace_q(&m, 10_000).unwrap().len(), 5);
    }

    #[test]
    fn nullspace_1x2() {
        // [1 2] has kernel spanned by (-2, 1)
        let m = q_matrix(&[&[(0, rat(1, 1)), (1, rat(2, 1))]], 2);
        let ker = nullspace_q(&m, 100).unwrap();
        assert_eq!(ker.len(), 1);
        let v = &ker[0];
        let ratio = &v[0] / &v[1];
        assert_eq!(ratio, rat(-2, 1));
    }

    #[test]
    fn exact_size_refusal() {
        let mut m = SparseMatrixQ::new(1000);
        m.push_row(vec![(0, rat(1, 1))]);
        assert!(matches!(
            rank_exact(&m, 10),
            Err(LinalgError::ExactSizeLimit { .. })
        ));
    }

    fn random_int_matrix(seed: u64, nr: usize, nc: usize) -> SparseMatrixQ {
        // splitmix-style generator: deterministic, dependency-free
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^ (z >> 31)
        };
        let mut m = SparseMatrixQ::new(nc);
        for _ in 0..nr {
            let mut row = Vec::new();
            for c in 0..nc {
                if next() % 3 == 0 {
                    row.push((c as u32, rat((next() % 19) as i64 - 9, 1)));
                }
            }
            m.push_row(row);
        }
        m
    }

    #[test]
    fn modular_rank_matches_bareiss() {
        let [p1, p2] = default_primes();
        for seed in 0..6 {
            let m = random_int_matrix(seed, 12, 9);
            let exact = rank_exact(&m, 10_000).unwrap();
            assert_eq!(rank_q(&m, 10_000).unwrap(), exact);
            assert_eq!(rank_mod(&m.to_mod(p1).unwrap()), exact, "seed {seed}");
            assert_eq!(rank_mod(&m.to_mod(p2).unwrap()), exact, "seed {seed}");
        }
    }

    #[test]
    fn nullspace_mod_verifies() {
        let p = default_primes()[0];
        let m = random_int_matrix(7, 6, 10).to_mod(p).unwrap();
        let ker = nullspace_mod(&m);
        assert_eq!(ker.len() + rank_mod(&m), 10);
    }

    proptest! {
        // Rank is invariant under row scaling and row permutation.
        #[test]
        fn rank_metamorphic(seed in 0u64..500, scale in 1i64..40, swap_a in 0usize..8, swap_b in 0usize..8) {
            let m = random_int_matrix(seed, 8, 6);
            let base = rank_q(&m, 10_000).unwrap();
            let mut rows: Vec<Vec<(u32, Rational)>> = m.rows().to_vec();
            rows.swap(swap_a % 8, swap_b % 8);
            let mut m2 = SparseMatrixQ::new(6);
            for (i, row) in rows.into_iter().enumerate() {
                let s = if i == swap_a % 8 { rat(scale, 1) } else { rat(1, 1) };
                m2.push_row(row.into_iter().map(|(c, v)| (c, v * &s)).collect());
            }
            prop_assert_eq!(rank_q(&m2, 10_000).unwrap(), base);
        }
    }
}
