//! Exact tensor elements: rational linear combinations of monomials of one
//! fixed degree, plus a leaner integer-coefficient form (`Expansion`) used by
//! the expansion-heavy inner loops.

use std::collections::HashMap;
use std::fmt;

use num::{BigRational, FromPrimitive, Signed, Zero};

use crate::error::CoreError;
use crate::monomial::TensorMonomial;

/// An element of `H^{⊗ n}` with exact rational coefficients. Zero terms are
/// never stored, so structural equality is semantic equality.
#[derive(Clone, PartialEq, Eq)]
pub struct TensorElement {
    degree: usize,
    terms: HashMap<u128, BigRational>,
}

impl TensorElement {
    pub fn zero(degree: usize) -> Self {
        TensorElement {
            degree,
            terms: HashMap::new(),
        }
    }

    pub fn from_terms<I>(degree: usize, terms: I) -> Result<Self, CoreError>
    where
        I: IntoIterator<Item = (TensorMonomial, BigRational)>,
    {
        let mut e = TensorElement::zero(degree);
        for (m, c) in terms {
            e.add_term(&m, c)?;
        }
        Ok(e)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn add_term(&mut self, m: &TensorMonomial, c: BigRational) -> Result<(), CoreError> {
        if m.degree() != self.degree {
            return Err(CoreError::DegreeMismatch {
                expected: self.degree,
                got: m.degree(),
            });
        }
        if c.is_zero() {
            return Ok(());
        }
        let slot = self.terms.entry(m.packed()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m.packed());
        }
        Ok(())
    }

    pub fn coefficient(&self, m: &TensorMonomial) -> BigRational {
        self.terms.get(&m.packed()).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_assign(&mut self, other: &TensorElement) -> Result<(), CoreError> {
        if other.degree != self.degree {
            return Err(CoreError::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        for (word, c) in &other.terms {
            let slot = self.terms.entry(*word).or_insert_with(BigRational::zero);
            *slot += c;
            if slot.is_zero() {
                self.terms.remove(word);
            }
        }
        Ok(())
    }

    pub fn sub(&self, other: &TensorElement) -> Result<TensorElement, CoreError> {
        let mut out = self.clone();
        out.add_assign(&other.scaled(&BigRational::from_i64(-1).unwrap()))?;
        Ok(out)
    }

    pub fn scaled(&self, c: &BigRational) -> TensorElement {
        if c.is_zero() {
            return TensorElement::zero(self.degree);
        }
        TensorElement {
            degree: self.degree,
            terms: self.terms.iter().map(|(w, v)| (*w, v * c)).collect(),
        }
    }

    /// Terms in ascending packed-word order; the canonical serialization order.
    pub fn iter_sorted(&self) -> Vec<(TensorMonomial, &BigRational)> {
        let mut out: Vec<_> = self
            .terms
            .iter()
            .map(|(w, c)| (TensorMonomial::from_packed(*w, self.degree), c))
            .collect();
        out.sort_by_key(|(m, _)| m.packed());
        out
    }
}

impl fmt::Display for TensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.iter_sorted().into_iter().enumerate() {
            if i == 0 {
                if c.is_negative() {
                    write!(f, "- ")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            if mag != BigRational::from_i64(1).unwrap() {
                write!(f, "{mag}·")?;
            }
            write!(f, "({m})")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TensorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Integer-coefficient element in a flat sorted vector. All the combinatorial
/// expansions in this crate produce integer coefficients, and the flat form
/// merges and iterates far faster than the rational map.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Expansion {
    degree: usize,
    /// Sorted by packed word, no duplicates, no zero coefficients.
    terms: Vec<(u128, i64)>,
}

impl Expansion {
    pub fn zero(degree: usize) -> Self {
        Expansion {
            degree,
            terms: Vec::new(),
        }
    }

    /// Sort, merge duplicates, and drop zeros.
    pub fn from_raw(degree: usize, mut raw: Vec<(u128, i64)>) -> Self {
        raw.sort_unstable_by_key(|&(w, _)| w);
        let mut terms: Vec<(u128, i64)> = Vec::with_capacity(raw.len());
        for (w, c) in raw {
            match terms.last_mut() {
                Some((lw, lc)) if *lw == w => {
                    *lc = lc.checked_add(c).expect("coefficient overflow");
                }
                _ => terms.push((w, c)),
            }
        }
        terms.retain(|&(_, c)| c != 0);
        Expansion { degree, terms }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(u128, i64)] {
        &self.terms
    }

    pub fn monomials(&self) -> impl Iterator<Item = (TensorMonomial, i64)> + '_ {
        self.terms
            .iter()
            .map(move |&(w, c)| (TensorMonomial::from_packed(w, self.degree), c))
    }

    pub fn add_scaled(&self, other: &Expansion, scale: i64) -> Expansion {
        assert_eq!(self.degree, other.degree, "degree mismatch");
        let mut raw = Vec::with_capacity(self.terms.len() + other.terms.len());
        raw.extend_from_slice(&self.terms);
        raw.extend(other.terms.iter().map(|&(w, c)| {
            (w, c.checked_mul(scale).expect("coefficient overflow"))
        }));
        Expansion::from_raw(self.degree, raw)
    }

    pub fn to_element(&self) -> TensorElement {
        TensorElement {
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|&(w, c)| (w, BigRational::from_i64(c).expect("i64 fits")))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::One;

    fn mono(s: &str) -> TensorMonomial {
        s.parse().unwrap()
    }

    fn one() -> BigRational {
        BigRational::one()
    }

    #[test]
    fn duplicate_terms_merge() {
        let x = mono("a1 b1");
        let e = TensorElement::from_terms(2, vec![(x, one()), (x, one())]).unwrap();
        assert_eq!(e.coefficient(&x), BigRational::from_i64(2).unwrap());
        assert_eq!(e.num_terms(), 1);
    }

    #[test]
    fn cancelling_terms_vanish() {
        let x = mono("a1 b1");
        let e = TensorElement::from_terms(2, vec![(x, one()), (x, -one())]).unwrap();
        assert!(e.is_zero());
        assert_eq!(e, TensorElement::zero(2));
    }

    #[test]
    fn mixed_degrees_are_rejected() {
        let mut e = TensorElement::zero(2);
        assert!(e.add_term(&mono("a1"), one()).is_err());
    }

    #[test]
    fn display_is_sorted_and_signed() {
        let e = TensorElement::from_terms(
            1,
            vec![
                (mono("b1"), -one()),
                (mono("a1"), BigRational::new(3.into(), 2.into())),
            ],
        )
        .unwrap();
        assert_eq!(e.to_string(), "3/2·(a1) - (b1)");
    }

    #[test]
    fn expansion_normalizes() {
        let a = mono("a1").packed();
        let b = mono("b1").packed();
        let e = Expansion::from_raw(1, vec![(b, 2), (a, 1), (b, -2), (a, 4)]);
        assert_eq!(e.terms(), &[(a, 5)]);
        assert_eq!(e.to_element().coefficient(&mono("a1")), BigRational::from_i64(5).unwrap());
    }

    #[test]
    fn add_scaled_combines() {
        let a = mono("a1").packed();
        let b = mono("b1").packed();
        let x = Expansion::from_raw(1, vec![(a, 1), (b, 1)]);
        let y = Expansion::from_raw(1, vec![(a, 1), (b, -1)]);
        let z = x.add_scaled(&y, -1);
        assert_eq!(z.terms(), &[(b, 2)]);
    }
}
