//! Perfect matchings of an even point set `{0, .., 2k-1}`, their
//! double-factorial ranking, and rotation classes of chord diagrams.
//!
//! Matchings index the pairing functionals used as coordinates on spider
//! spans, so the rank/unrank bijection here is load-bearing: it is the column
//! numbering of every matrix downstream.

use std::fmt;

use crate::error::CoreError;

/// Largest point set supported (degree-20 words would need it; weight 12 uses 14).
pub const MAX_POINTS: usize = 20;

/// `(points - 1)!!` for even `points` up to `MAX_POINTS`, tabulated because
/// ranking calls this once per pair drawn.
const DOUBLE_FACTORIAL: [u64; MAX_POINTS / 2 + 1] = {
    let mut table = [1u64; MAX_POINTS / 2 + 1];
    let mut k = 1;
    while k <= MAX_POINTS / 2 {
        table[k] = table[k - 1] * (2 * k as u64 - 1);
        k += 1;
    }
    table
};

/// Number of perfect matchings of `points` points: `(points - 1)!!`.
pub fn matchings_count(points: usize) -> u64 {
    assert!(points % 2 == 0 && points <= MAX_POINTS);
    DOUBLE_FACTORIAL[points / 2]
}

/// A perfect matching in canonical form: each pair `(p, q)` has `p < q`,
/// pairs sorted by first element, and the pairs cover `0..points`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching {
    pairs: Vec<(u8, u8)>,
}

impl Matching {
    pub fn new(pairs: Vec<(u8, u8)>) -> Result<Self, CoreError> {
        let points = 2 * pairs.len();
        if points > MAX_POINTS {
            return Err(CoreError::Parse(format!("{points} points exceeds limit")));
        }
        let mut seen = vec![false; points];
        let mut canon: Vec<(u8, u8)> = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let (p, q) = if a < b { (a, b) } else { (b, a) };
            if p == q || q as usize >= points {
                return Err(CoreError::Parse(format!("bad pair ({a},{b})")));
            }
            if seen[p as usize] || seen[q as usize] {
                return Err(CoreError::Parse(format!("point reused in pair ({a},{b})")));
            }
            seen[p as usize] = true;
            seen[q as usize] = true;
            canon.push((p, q));
        }
        canon.sort_unstable();
        Ok(Matching { pairs: canon })
    }

    pub fn points(&self) -> usize {
        2 * self.pairs.len()
    }

    pub fn pairs(&self) -> &[(u8, u8)] {
        &self.pairs
    }

    /// Partner of each point, as a flat lookup table.
    pub fn partners(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.points()];
        for &(p, q) in &self.pairs {
            out[p as usize] = q;
            out[q as usize] = p;
        }
        out
    }

    /// Position in the mixed-radix enumeration of all matchings of this point
    /// count: repeatedly pair off the smallest free point and record which of
    /// the remaining free points it takes, weighted by double factorials.
    pub fn rank(&self) -> u64 {
        rank_of_partners(&self.partners())
    }

    pub fn unrank(points: usize, rank: u64) -> Result<Self, CoreError> {
        assert!(points % 2 == 0 && points <= MAX_POINTS);
        if rank >= matchings_count(points) {
            return Err(CoreError::MatchingRank { rank, points });
        }
        let mut rank = rank;
        let mut used: u32 = 0;
        let mut remaining = points;
        let mut pairs = Vec::with_capacity(points / 2);
        while remaining > 0 {
            let p = (!used).trailing_zeros() as usize;
            used |= 1 << p;
            let block = matchings_count(remaining - 2);
            let digit = rank / block;
            rank %= block;
            // q is the (digit+1)-th free point above p: drop `digit` low bits.
            let mut free = !used & ((1u32 << points) - 1);
            for _ in 0..digit {
                free &= free - 1;
            }
            let q = free.trailing_zeros() as usize;
            debug_assert!(q < points);
            used |= 1 << q;
            pairs.push((p as u8, q as u8));
            remaining -= 2;
        }
        Ok(Matching { pairs })
    }

    /// Enumerate every matching of `points` points in rank order.
    pub fn all(points: usize) -> impl Iterator<Item = Matching> {
        (0..matchings_count(points)).map(move |r| Matching::unrank(points, r).expect("in range"))
    }

    /// Relabel points through `perm` (point `p` becomes `perm[p]`). The sign
    /// is `(-1)^(number of pairs whose orientation flips)`, matching the
    /// antisymmetry of the form each pair contracts with.
    pub fn transported(&self, perm: &[u8]) -> (Matching, i64) {
        debug_assert_eq!(perm.len(), self.points());
        let mut sign = 1i64;
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for &(p, q) in &self.pairs {
            let (np, nq) = (perm[p as usize], perm[q as usize]);
            if np < nq {
                pairs.push((np, nq));
            } else {
                sign = -sign;
                pairs.push((nq, np));
            }
        }
        pairs.sort_unstable();
        (Matching { pairs }, sign)
    }
}

/// `Matching::rank` on a bare partner table (`partner[p] = q`), for hot loops
/// that never materialize a `Matching`.
pub fn rank_of_partners(partner: &[u8]) -> u64 {
    let points = partner.len();
    debug_assert!(points % 2 == 0 && points <= MAX_POINTS);
    let mut used: u32 = 0;
    let mut remaining = points;
    let mut rank = 0u64;
    while remaining > 0 {
        let p = (!used).trailing_zeros() as usize;
        let q = partner[p] as usize;
        let between = !used & ((1u32 << q) - 1) & !((1u32 << (p + 1)) - 1);
        used |= (1 << p) | (1 << q);
        rank += between.count_ones() as u64 * matchings_count(remaining - 2);
        remaining -= 2;
    }
    rank
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(p, q) in &self.pairs {
            write!(f, "({},{})", p + 1, q + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Rotation classes of chord diagrams: matchings of `points` cyclically
/// ordered points, up to rotation. The class id is the minimum rank over the
/// rotation orbit, so ids are stable across runs.
pub fn rotation_class_id(m: &Matching) -> u64 {
    let points = m.points();
    let mut best = u64::MAX;
    let mut perm: Vec<u8> = (0..points as u8).collect();
    for r in 0..points {
        for (p, slot) in perm.iter_mut().enumerate() {
            *slot = ((p + r) % points) as u8;
        }
        let (rot, _) = m.transported(&perm);
        best = best.min(rot.rank());
    }
    best
}

/// All rotation-class ids for matchings of `points` points, sorted. The index
/// of an id in this list is the class's column number.
pub fn chord_classes(points: usize) -> Vec<u64> {
    let mut ids: Vec<u64> = Matching::all(points).map(|m| rotation_class_id(&m)).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn counts_are_double_factorials() {
        assert_eq!(matchings_count(0), 1);
        assert_eq!(matchings_count(2), 1);
        assert_eq!(matchings_count(4), 3);
        assert_eq!(matchings_count(12), 10395);
        assert_eq!(matchings_count(14), 135135);
    }

    #[test]
    fn rank_unrank_roundtrip_small() {
        for points in [2usize, 4, 6, 8] {
            for r in 0..matchings_count(points) {
                let m = Matching::unrank(points, r).unwrap();
                assert_eq!(m.rank(), r, "points={points}");
                assert_eq!(m.points(), points);
            }
        }
        assert!(Matching::unrank(4, 3).is_err());
    }

    #[test]
    fn rank_unrank_roundtrip_fourteen() {
        // Spot-check the production size on a stride through the range.
        for r in (0..matchings_count(14)).step_by(997) {
            let m = Matching::unrank(14, r).unwrap();
            assert_eq!(m.rank(), r);
        }
    }

    #[test]
    fn rank_zero_is_adjacent_pairs() {
        let m = Matching::unrank(6, 0).unwrap();
        assert_eq!(m.pairs(), &[(0, 1), (2, 3), (4, 5)]);
        let last = Matching::unrank(6, matchings_count(6) - 1).unwrap();
        assert_eq!(last.pairs(), &[(0, 5), (1, 4), (2, 3)]);
    }

    #[test]
    fn validation_rejects_bad_pair_sets() {
        assert!(Matching::new(vec![(0, 1), (1, 2)]).is_err());
        assert!(Matching::new(vec![(0, 0)]).is_err());
        assert!(Matching::new(vec![(0, 3)]).is_err());
        let m = Matching::new(vec![(3, 2), (1, 0)]).unwrap();
        assert_eq!(m.pairs(), &[(0, 1), (2, 3)]);
    }

    #[test]
    fn transport_signs_track_orientation_flips() {
        let m = Matching::new(vec![(0, 1), (2, 3)]).unwrap();
        // Swap points 0 and 1: one pair flips orientation.
        let (same, sign) = m.transported(&[1, 0, 2, 3]);
        assert_eq!(same, m);
        assert_eq!(sign, -1);
        // Rotate by one: (0,1) -> (1,2) keeps order, (2,3) -> (3,0) flips.
        let (rot, sign) = m.transported(&[1, 2, 3, 0]);
        assert_eq!(rot, Matching::new(vec![(1, 2), (0, 3)]).unwrap());
        assert_eq!(sign, -1);
    }

    #[test]
    fn display_is_one_based() {
        let m = Matching::new(vec![(0, 2), (1, 3)]).unwrap();
        assert_eq!(m.to_string(), "(1,3)(2,4)");
    }

    #[test]
    fn rotation_classes_partition_the_matchings() {
        // Orbit sizes divide the rotation order and orbits partition the set.
        let points = 8;
        let mut orbit_sizes: HashMap<u64, u64> = HashMap::new();
        for m in Matching::all(points) {
            *orbit_sizes.entry(rotation_class_id(&m)).or_insert(0) += 1;
        }
        let total: u64 = orbit_sizes.values().sum();
        assert_eq!(total, matchings_count(points));
        for (&id, &size) in &orbit_sizes {
            assert!(points as u64 % size == 0, "orbit {id} has size {size}");
            // The class id is the minimum rank in its own orbit.
            let rep = Matching::unrank(points, id).unwrap();
            assert_eq!(rotation_class_id(&rep), id);
        }
        assert_eq!(orbit_sizes.len(), chord_classes(points).len());
    }

    #[test]
    fn burnside_count_agrees_with_direct_enumeration() {
        for points in [4usize, 6, 8, 10] {
            let mut fixed_total = 0u64;
            let mut perm = vec![0u8; points];
            for r in 0..points {
                for (p, slot) in perm.iter_mut().enumerate() {
                    *slot = ((p + r) % points) as u8;
                }
                fixed_total += Matching::all(points)
                    .filter(|m| m.transported(&perm).0 == *m)
                    .count() as u64;
            }
            assert_eq!(
                fixed_total % points as u64,
                0,
                "Burnside total must divide evenly"
            );
            assert_eq!(
                fixed_total / points as u64,
                chord_classes(points).len() as u64,
                "points={points}"
            );
        }
    }
}
