//! Row-major sparse matrices over Q and over Z/p, with a text snapshot format.

use crate::error::LinalgError;
use crate::modp::reduce_i64;
use crate::rational::{parse_rational, rational_mod, Rational};
use num::Zero;
use std::io::{BufRead, Write};

/// Rows hold (col, value) pairs sorted by column; zero values are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixQ {
    ncols: usize,
    rows: Vec<Vec<(u32, Rational)>>,
}

impl SparseMatrixQ {
    pub fn new(ncols: usize) -> Self {
        SparseMatrixQ { ncols, rows: Vec::new() }
    }

    /// Entries may arrive unsorted and may repeat; repeats are summed.
    pub fn push_row(&mut self, mut entries: Vec<(u32, Rational)>) {
        entries.sort_unstable_by_key(|e| e.0);
        let mut row: Vec<(u32, Rational)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            assert!((c as usize) < self.ncols, "column {c} out of range");
            match row.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => row.push((c, v)),
            }
        }
        row.retain(|e| !e.1.is_zero());
        self.rows.push(row);
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<(u32, Rational)>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn transpose(&self) -> SparseMatrixQ {
        let mut rows = vec![Vec::new(); self.ncols];
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                rows[*c as usize].push((r as u32, v.clone()));
            }
        }
        SparseMatrixQ { ncols: self.nrows(), rows }
    }

    /// Reduce every entry mod p.
    pub fn to_mod(&self, p: u64) -> Result<SparseMatrixMod, LinalgError> {
        let mut out = SparseMatrixMod::new(self.ncols, p);
        for row in &self.rows {
            let mut entries = Vec::with_capacity(row.len());
            for (c, v) in row {
                entries.push((*c, rational_mod(v, p)?));
            }
            out.push_row(entries);
        }
        Ok(out)
    }

    /// Matrix-vector product, exact.
    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.ncols);
        self.rows
            .iter()
            .map(|row| row.iter().map(|(c, x)| x * &v[*c as usize]).sum())
            .collect()
    }

    pub fn write_snapshot<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{} {} Q", self.nrows(), self.ncols)?;
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                writeln!(w, "{r} {c} {v}")?;
            }
        }
        Ok(())
    }

    pub fn read_snapshot<R: BufRead>(r: R) -> Result<SparseMatrixQ, LinalgError> {
        let (nrows, ncols, field, entries) = parse_snapshot(r)?;
        if field != "Q" {
            return Err(LinalgError::SnapshotParse(format!("expected field Q, got {field}")));
        }
        let mut m = SparseMatrixQ { ncols, rows: vec![Vec::new(); nrows] };
        for (r, c, v) in entries {
            m.rows[r].push((c, parse_rational(&v)?));
        }
        for row in &mut m.rows {
            row.sort_unstable_by_key(|e| e.0);
        }
        Ok(m)
    }
}

/// Entries live in [0, p); p is prime and exceeds 2^31.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrixMod {
    p: u64,
    ncols: usize,
    rows: Vec<Vec<(u32, u64)>>,
}

impl SparseMatrixMod {
    pub fn new(ncols: usize, p: u64) -> Self {
        assert!(p > (1 << 31), "modulus must exceed 2^31");
        SparseMatrixMod { p, ncols, rows: Vec::new() }
    }

    pub fn push_row(&mut self, mut entries: Vec<(u32, u64)>) {
        entries.sort_unstable_by_key(|e| e.0);
        let mut row: Vec<(u32, u64)> = Vec::with_capacity(entries.len());
        for (c, v) in entries {
            assert!((c as usize) < self.ncols, "column {c} out of range");
            let v = v % self.p;
            match row.last_mut() {
                Some(last) if last.0 == c => last.1 = crate::modp::addmod(last.1, v, self.p),
                _ => row.push((c, v)),
            }
        }
        row.retain(|e| e.1 != 0);
        self.rows.push(row);
    }

    pub fn push_row_i64(&mut self, entries: &[(u32, i64)]) {
        let p = self.p;
        self.push_row(entries.iter().map(|&(c, v)| (c, reduce_i64(v, p))).collect());
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Vec<(u32, u64)>] {
        &self.rows
    }

    pub fn transpose(&self) -> SparseMatrixMod {
        let mut rows = vec![Vec::new(); self.ncols];
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                rows[*c as usize].push((r as u32, *v));
            }
        }
        SparseMatrixMod { p: self.p, ncols: self.nrows(), rows }
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.ncols);
        self.rows
            .iter()
            .map(|row| {
                let mut acc = 0u128;
                for chunk in row.chunks(15) {
                    for (c, x) in chunk {
                        acc += *x as u128 * v[*c as usize] as u128;
                    }
                    acc %= self.p as u128;
                }
                acc as u64
            })
            .collect()
    }

    pub fn write_snapshot<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{} {} mod:{}", self.nrows(), self.ncols, self.p)?;
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                writeln!(w, "{r} {c} {v}")?;
            }
        }
        Ok(())
    }

    pub fn read_snapshot<R: BufRead>(r: R) -> Result<SparseMatrixMod, LinalgError> {
        let (nrows, ncols, field, entries) = parse_snapshot(r)?;
        let p: u64 = field
            .strip_prefix("mod:")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| LinalgError::SnapshotParse(format!("bad field {field}")))?;
        let mut m = SparseMatrixMod { p, ncols, rows: vec![Vec::new(); nrows] };
        for (r, c, v) in entries {
            let v: u64 = v.parse().map_err(|_| LinalgError::SnapshotParse(format!("bad value {v}")))?;
            if v >= p {
                return Err(LinalgError::SnapshotParse(format!("value {v} not reduced mod {p}")));
            }
            m.rows[r].push((c, v));
        }
        for row in &mut m.rows {
            row.sort_unstable_by_key(|e| e.0);
        }
        Ok(m)
    }
}

type SnapshotEntries = (usize, usize, String, Vec<(usize, u32, String)>);

fn parse_snapshot<R: BufRead>(r: R) -> Result<SnapshotEntries, LinalgError> {
    let bad = |m: &str| LinalgError::SnapshotParse(m.to_string());
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad("empty snapshot"))?.map_err(|e| bad(&e.to_string()))?;
    let mut it = header.split_whitespace();
    let nrows: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad header"))?;
    let ncols: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad header"))?;
    let field = it.next().ok_or_else(|| bad("bad header"))?.to_string();
    if it.next().is_some() {
        return Err(bad("trailing header tokens"));
    }
    let mut entries = Vec::new();
    for line in lines {
        let line = line.map_err(|e| bad(&e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let r: usize = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(&line))?;
        let c: u32 = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(&line))?;
        let v = it.next().ok_or_else(|| bad(&line))?.to_string();
        if it.next().is_some() || r >= nrows || c as usize >= ncols {
            return Err(bad(&line));
        }
        entries.push((r, c, v));
    }
    Ok((nrows, ncols, field, entries))
}
