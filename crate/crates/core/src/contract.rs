//! Pairing functionals on tensor words: contract every slot against a
//! partner slot through the symplectic form, one perfect matching at a time.
//!
//! Two evaluation routes are kept deliberately separate. The direct route
//! walks a given matching over every monomial (obviously correct, used as an
//! oracle). The profile route inverts the loop: for each monomial it
//! enumerates only the matchings whose every pair joins an `a_i` to a `b_i`
//! (all others contract to zero), which is what makes 135135-column rows
//! affordable.

use num::BigRational;
use num::Zero;

use crate::element::{Expansion, TensorElement};
use crate::error::CoreError;
use crate::matching::{matchings_count, rank_of_partners, Matching};
use crate::monomial::LETTER_BITS;
use crate::sym::MAX_GENUS;

/// Contract a rational element with one matching: `Σ_m c_m · Π_t μ(x_{i_t}, x_{j_t})`.
pub fn contract(e: &TensorElement, m: &Matching) -> Result<BigRational, CoreError> {
    if e.degree() != m.points() {
        return Err(CoreError::DegreeMismatch {
            expected: m.points(),
            got: e.degree(),
        });
    }
    let mut acc = BigRational::zero();
    for (word, coeff) in e.iter_sorted() {
        match word_sign(word.packed(), m) {
            1 => acc += coeff,
            -1 => acc -= coeff,
            _ => {}
        }
    }
    Ok(acc)
}

/// `contract` for integer expansions.
pub fn contract_expansion(e: &Expansion, m: &Matching) -> Result<i64, CoreError> {
    if e.degree() != m.points() {
        return Err(CoreError::DegreeMismatch {
            expected: m.points(),
            got: e.degree(),
        });
    }
    let mut acc = 0i64;
    for &(word, coeff) in e.terms() {
        acc = acc
            .checked_add(word_sign(word, m) * coeff)
            .expect("contraction overflow");
    }
    Ok(acc)
}

/// `Π_t μ(x_{i_t}, x_{j_t})` for one packed word: ±1, or 0 at the first
/// non-pairing factor.
fn word_sign(word: u128, m: &Matching) -> i64 {
    let mut sign = 1i64;
    for &(p, q) in m.pairs() {
        let cp = slot_code(word, p as usize);
        let cq = slot_code(word, q as usize);
        // Paired codes differ exactly in the kind bit; the sign is + when
        // the earlier slot holds the `a`.
        if cp ^ cq != 1 {
            return 0;
        }
        if cp & 1 == 1 {
            sign = -sign;
        }
    }
    sign
}

fn slot_code(word: u128, slot: usize) -> u8 {
    (((word >> (LETTER_BITS * slot as u32)) & 0x3f) as u8) - 1
}

/// Slots of `word` holding `a_i` resp. `b_i`, per letter index, or `None`
/// when some index is unbalanced (then no matching contracts it nonzero).
fn letter_groups(word: u128, degree: usize) -> Option<Vec<(Vec<u8>, Vec<u8>)>> {
    let mut a_pos: [Vec<u8>; MAX_GENUS] = Default::default();
    let mut b_pos: [Vec<u8>; MAX_GENUS] = Default::default();
    for slot in 0..degree {
        let code = slot_code(word, slot);
        let side = if code & 1 == 0 { &mut a_pos } else { &mut b_pos };
        side[(code >> 1) as usize].push(slot as u8);
    }
    let mut groups = Vec::new();
    for (aa, bb) in a_pos.into_iter().zip(b_pos) {
        if aa.len() != bb.len() {
            return None;
        }
        if !aa.is_empty() {
            groups.push((aa, bb));
        }
    }
    Some(groups)
}

/// Drive `out` over every matching compatible with the grouped word: within
/// each letter index, every bijection of `a` slots onto `b` slots. The sign
/// accumulates a flip whenever the `b` slot precedes its `a` slot.
fn emit_compatible(
    groups: &[(Vec<u8>, Vec<u8>)],
    gi: usize,
    ai: usize,
    used: u16,
    partner: &mut [u8],
    sign: i64,
    out: &mut dyn FnMut(&[u8], i64),
) {
    let Some((aa, bb)) = groups.get(gi) else {
        out(partner, sign);
        return;
    };
    if ai == aa.len() {
        emit_compatible(groups, gi + 1, 0, 0, partner, sign, out);
        return;
    }
    let p = aa[ai];
    for (t, &q) in bb.iter().enumerate() {
        if used & (1 << t) != 0 {
            continue;
        }
        partner[p as usize] = q;
        partner[q as usize] = p;
        let s = if p < q { sign } else { -sign };
        emit_compatible(groups, gi, ai + 1, used | (1 << t), partner, s, out);
    }
}

/// The full row of `e` against every matching of its degree: pairs
/// `(matching rank, value)` with nonzero values, sorted by rank.
pub fn matching_profile(e: &Expansion) -> Result<Vec<(u32, i64)>, CoreError> {
    let degree = e.degree();
    if degree % 2 != 0 {
        return Err(CoreError::OddDegree(degree));
    }
    let mut raw: Vec<(u32, i64)> = Vec::new();
    let mut partner = vec![0u8; degree];
    for &(word, coeff) in e.terms() {
        let Some(groups) = letter_groups(word, degree) else {
            continue;
        };
        emit_compatible(&groups, 0, 0, 0, &mut partner, coeff, &mut |p, s| {
            raw.push((rank_of_partners(p) as u32, s));
        });
    }
    raw.sort_unstable_by_key(|&(r, _)| r);
    let mut merged: Vec<(u32, i64)> = Vec::with_capacity(raw.len());
    for (r, v) in raw {
        match merged.last_mut() {
            Some(last) if last.0 == r => {
                last.1 = last.1.checked_add(v).expect("contraction overflow")
            }
            _ => merged.push((r, v)),
        }
    }
    merged.retain(|&(_, v)| v != 0);
    Ok(merged)
}

/// A chosen set of matchings used as coordinates, with a dense rank-to-column
/// table so rows can be projected onto it without search.
#[derive(Debug, Clone)]
pub struct SelectedMatchings {
    points: usize,
    ranks: Vec<u32>,
    index_of: Vec<u32>,
}

const NO_COLUMN: u32 = u32::MAX;

impl SelectedMatchings {
    pub fn new(points: usize, ranks: Vec<u32>) -> Result<Self, CoreError> {
        let total = matchings_count(points);
        let mut index_of = vec![NO_COLUMN; total as usize];
        for (col, &r) in ranks.iter().enumerate() {
            if u64::from(r) >= total {
                return Err(CoreError::MatchingRank {
                    rank: u64::from(r),
                    points,
                });
            }
            if index_of[r as usize] != NO_COLUMN {
                return Err(CoreError::Parse(format!("matching rank {r} listed twice")));
            }
            index_of[r as usize] = col as u32;
        }
        Ok(SelectedMatchings {
            points,
            ranks,
            index_of,
        })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn matching(&self, column: usize) -> Matching {
        Matching::unrank(self.points, u64::from(self.ranks[column])).expect("validated rank")
    }

    pub fn column_of_rank(&self, rank: u32) -> Option<usize> {
        match self.index_of[rank as usize] {
            NO_COLUMN => None,
            col => Some(col as usize),
        }
    }
}

/// The coordinate vector of `e`: its contractions against the selected
/// matchings, in column order.
pub fn selected_profile(e: &Expansion, sel: &SelectedMatchings) -> Result<Vec<i64>, CoreError> {
    if e.degree() != sel.points() {
        return Err(CoreError::DegreeMismatch {
            expected: sel.points(),
            got: e.degree(),
        });
    }
    let mut row = vec![0i64; sel.len()];
    let mut partner = vec![0u8; e.degree()];
    for &(word, coeff) in e.terms() {
        let Some(groups) = letter_groups(word, e.degree()) else {
            continue;
        };
        emit_compatible(&groups, 0, 0, 0, &mut partner, coeff, &mut |p, s| {
            if let Some(col) = sel.column_of_rank(rank_of_partners(p) as u32) {
                row[col] = row[col].checked_add(s).expect("contraction overflow");
            }
        });
    }
    Ok(row)
}
