//! Incremental dense row echelon over Z/p for wide rank streams.
//!
//! Rows arrive one at a time (spider or bracket pairing rows); the state keeps
//! every pivot row normalized to a leading 1.  Reduction accumulates products
//! in u128 and reduces once per 15 eliminations, which the sub-2^62 default
//! primes make safe, so each entry costs roughly one widening multiply.

use crate::modp::{invmod, mulmod, reduce_i64};

pub struct IncrementalEchelon {
    p: u64,
    width: usize,
    rows: Vec<Box<[u64]>>,
    pivot_cols: Vec<u32>,
    col_to_row: Vec<u32>,
    scratch: Vec<u128>,
}

impl IncrementalEchelon {
    pub fn new(width: usize, p: u64) -> Self {
        assert!(p > (1 << 31) && p < (1 << 62), "prime out of supported range");
        IncrementalEchelon {
            p,
            width,
            rows: Vec::new(),
            pivot_cols: Vec::new(),
            col_to_row: vec![u32::MAX; width],
            scratch: vec![0u128; width],
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Pivot columns in ascending order.
    pub fn pivot_cols(&self) -> Vec<u32> {
        let mut cols = self.pivot_cols.clone();
        cols.sort_unstable();
        cols
    }

    /// Reduce the row against the state; if independent, install it as a new
    /// pivot row and return its pivot column.
    pub fn insert(&mut self, entries: &[(u32, i64)]) -> Option<u32> {
        let p = self.p;
        self.scratch.iter_mut().for_each(|v| *v = 0);
        for &(c, v) in entries {
            debug_assert!((c as usize) < self.width);
            self.scratch[c as usize] += reduce_i64(v, p) as u128;
        }
        let mut pos = 0usize;
        let mut since_reduce = 0u32;
        loop {
            // scan for the leading nonzero, canonicalizing as we go
            let mut lead = None;
            for c in pos..self.width {
                let v = (self.scratch[c] % p as u128) as u64;
                self.scratch[c] = v as u128;
                if v != 0 {
                    lead = Some(c);
                    break;
                }
            }
            let Some(c) = lead else { return None };
            let owner = self.col_to_row[c];
            if owner == u32::MAX {
                let inv = invmod(self.scratch[c] as u64, p);
                let mut row = vec![0u64; self.width].into_boxed_slice();
                for i in c..self.width {
                    row[i] = mulmod((self.scratch[i] % p as u128) as u64, inv, p);
                }
                let idx = self.rows.len() as u32;
                self.rows.push(row);
                self.pivot_cols.push(c as u32);
                self.col_to_row[c] = idx;
                return Some(c as u32);
            }
            // eliminate: scratch += (p - scratch[c]) * pivot_row
            let f = p - self.scratch[c] as u64;
            let pivot = &self.rows[owner as usize];
            for i in c..self.width {
                self.scratch[i] += f as u128 * pivot[i] as u128;
            }
            pos = c + 1;
            since_reduce += 1;
            if since_reduce == 15 {
                for v in &mut self.scratch[pos..] {
                    *v %= p as u128;
                }
                since_reduce = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modp::default_primes;

    #[test]
    fn rank_of_dependent_rows() {
        let p = default_primes()[0];
        let mut e = IncrementalEchelon::new(4, p);
        assert_eq!(e.insert(&[(0, 1), (1, 2)]), Some(0));
        assert_eq!(e.insert(&[(1, 1), (3, -1)]), Some(1));
        // 2*(row0) + 3*(row1) is dependent
        assert_eq!(e.insert(&[(0, 2), (1, 7), (3, -3)]), None);
        assert_eq!(e.insert(&[(2, 5)]), Some(2));
        assert_eq!(e.rank(), 3);
        assert_eq!(e.pivot_cols(), vec![0, 1, 2]);
    }

    #[test]
    fn duplicate_entry_accumulation() {
        let p = default_primes()[0];
        let mut e = IncrementalEchelon::new(2, p);
        // entries may repeat a column; they are summed
        assert_eq!(e.insert(&[(0, 3), (0, -3), (1, 1)]), Some(1));
        assert_eq!(e.rank(), 1);
    }

    #[test]
    fn long_reduction_chains_reduce_correctly() {
        // Force > 15 eliminations on one incoming row to exercise the lazy
        // reduction path with values near the modulus.
        let p = default_primes()[0];
        let w = 40;
        let mut e = IncrementalEchelon::new(w, p);
        let big = (p - 1) as i64 - 7;
        for i in 0..w - 1 {
            let row = vec![(i as u32, big), (i as u32 + 1, big - 3), (w as u32 - 1, 1i64)];
            assert!(e.insert(&row).is_some(), "row {i}");
        }
        // a combination of all previous rows must reduce to zero or a new pivot,
        // and either way the arithmetic must match a plain mod-p elimination
        let mut probe: Vec<(u32, i64)> = (0..w as u32).map(|c| (c, (c as i64 % 5) - 2)).collect();
        probe.push((0, big));
        let before = e.rank();
        let res = e.insert(&probe);
        match res {
            Some(_) => assert_eq!(e.rank(), before + 1),
            None => assert_eq!(e.rank(), before),
        }
        // cross-check the final rank against the Markowitz path
        let mut m = crate::sparse::SparseMatrixMod::new(w, p);
        for i in 0..w - 1 {
            m.push_row_i64(&[(i as u32, big), (i as u32 + 1, big - 3), (w as u32 - 1, 1)]);
        }
        m.push_row_i64(&probe);
        assert_eq!(crate::elim::rank_mod(&m), e.rank());
    }

    #[test]
    fn agrees_with_markowitz_on_random_matrices() {
        let [p1, p2] = default_primes();
        let mut state = 42u64;
        let mut next = move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^ (z >> 31)
        };
        for _ in 0..5 {
            let (nr, nc) = (12, 10);
            let mut rows: Vec<Vec<(u32, i64)>> = Vec::new();
            for _ in 0..nr {
                let mut row = Vec::new();
                for c in 0..nc as u32 {
                    if next() % 2 == 0 {
                        row.push((c, (next() % 11) as i64 - 5));
                    }
                }
                rows.push(row);
            }
            for p in [p1, p2] {
                let mut e = IncrementalEchelon::new(nc, p);
                for r in &rows {
                    e.insert(r);
                }
                let mut m = crate::sparse::SparseMatrixMod::new(nc, p);
                for r in &rows {
                    m.push_row_i64(r);
                }
                assert_eq!(e.rank(), crate::elim::rank_mod(&m));
            }
        }
    }
}
