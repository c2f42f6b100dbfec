//! Contractions evaluated over formal legs: values become polynomials in
//! symbols `μ(u_i, u_j)` instead of numbers, so an identity checked here
//! holds for every genus at once.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, One, Signed, Zero};

use crate::error::CoreError;
use crate::matching::Matching;
use crate::sym::{mu_sign, Letter};

/// One product `μ(u_{i_1}, u_{j_1}) ⋯ μ(u_{i_k}, u_{j_k})` over formal
/// symbols, canonical: each factor has `i < j` (antisymmetry sign pulled
/// out), factors sorted. Symbols are 0-based ids; display is 1-based.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub struct MuMonomial {
    factors: Vec<(u8, u8)>,
}

impl MuMonomial {
    /// Canonicalize a factor list. The returned sign is `-1` to the number
    /// of argument swaps, or `0` when some factor is `μ(u, u)` (identically
    /// zero by antisymmetry), in which case the monomial is empty.
    pub fn new(pairs: &[(u8, u8)]) -> (MuMonomial, i64) {
        let mut sign = 1i64;
        let mut factors = Vec::with_capacity(pairs.len());
        for &(u, v) in pairs {
            match u.cmp(&v) {
                std::cmp::Ordering::Less => factors.push((u, v)),
                std::cmp::Ordering::Greater => {
                    sign = -sign;
                    factors.push((v, u));
                }
                std::cmp::Ordering::Equal => return (MuMonomial { factors: vec![] }, 0),
            }
        }
        factors.sort_unstable();
        (MuMonomial { factors }, sign)
    }

    pub fn factors(&self) -> &[(u8, u8)] {
        &self.factors
    }

    /// Value under an assignment of basis letters to symbol ids.
    pub fn specialize(&self, assignment: &[Letter]) -> i64 {
        let mut sign = 1i64;
        for &(u, v) in &self.factors {
            sign *= mu_sign(assignment[u as usize], assignment[v as usize]);
            if sign == 0 {
                return 0;
            }
        }
        sign
    }
}

impl fmt::Display for MuMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for &(u, v) in &self.factors {
            write!(f, "μ(u{},u{})", u + 1, v + 1)?;
        }
        Ok(())
    }
}

/// A rational combination of canonical μ-monomials.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MuPolynomial {
    terms: BTreeMap<MuMonomial, BigRational>,
}

impl MuPolynomial {
    pub fn zero() -> Self {
        MuPolynomial::default()
    }

    /// Add `coeff · mono`; zero coefficients are pruned.
    pub fn add_term(&mut self, mono: MuMonomial, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            let dead: Vec<MuMonomial> = self
                .terms
                .iter()
                .filter(|(_, c)| c.is_zero())
                .map(|(m, _)| m.clone())
                .collect();
            for m in dead {
                self.terms.remove(&m);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MuMonomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mono: &MuMonomial) -> BigRational {
        self.terms.get(mono).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Value under an assignment of basis letters to symbol ids.
    pub fn specialize(&self, assignment: &[Letter]) -> BigRational {
        let mut acc = BigRational::zero();
        for (mono, coeff) in &self.terms {
            match mono.specialize(assignment) {
                1 => acc += coeff,
                -1 => acc -= coeff,
                _ => {}
            }
        }
        acc
    }
}

impl fmt::Display for MuPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (mono, coeff)) in self.terms.iter().enumerate() {
            if i == 0 {
                if coeff.is_negative() {
                    write!(f, "-")?;
                }
            } else if coeff.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = coeff.abs();
            if !a.is_one() {
                write!(f, "{a}·")?;
            }
            write!(f, "{mono}")?;
        }
        Ok(())
    }
}

/// Contract a formal monomial (slot `t` holds symbol `slots[t]`) with one
/// matching: a single canonical μ-monomial with its normalization sign.
pub fn symbolic_contract(slots: &[u8], m: &Matching) -> Result<MuPolynomial, CoreError> {
    if slots.len() != m.points() {
        return Err(CoreError::DegreeMismatch {
            expected: m.points(),
            got: slots.len(),
        });
    }
    let pairs: Vec<(u8, u8)> = m
        .pairs()
        .iter()
        .map(|&(p, q)| (slots[p as usize], slots[q as usize]))
        .collect();
    let (mono, sign) = MuMonomial::new(&pairs);
    let mut out = MuPolynomial::zero();
    out.add_term(mono, BigRational::from_integer(sign.into()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::contract;
    use crate::element::TensorElement;
    use crate::monomial::TensorMonomial;
    use proptest::prelude::*;

    fn matching(pairs: &[(u8, u8)]) -> Matching {
        Matching::new(pairs.to_vec()).unwrap()
    }

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn identity_slots_give_positive_monomial() {
        let p = symbolic_contract(&[0, 1], &matching(&[(0, 1)])).unwrap();
        assert_eq!(p.to_string(), "μ(u1,u2)");
    }

    #[test]
    fn swapped_slots_flip_the_sign() {
        let p = symbolic_contract(&[1, 0], &matching(&[(0, 1)])).unwrap();
        assert_eq!(p.to_string(), "-μ(u1,u2)");
    }

    #[test]
    fn four_slots_cross_pairing() {
        let p = symbolic_contract(&[0, 1, 2, 3], &matching(&[(0, 3), (1, 2)])).unwrap();
        assert_eq!(p.to_string(), "μ(u1,u4)μ(u2,u3)");
    }

    #[test]
    fn repeated_symbol_in_one_factor_vanishes() {
        let p = symbolic_contract(&[0, 0], &matching(&[(0, 1)])).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn polynomial_arithmetic_cancels() {
        let (m1, s1) = MuMonomial::new(&[(2, 0), (1, 3)]);
        assert_eq!(s1, -1);
        let mut p = MuPolynomial::zero();
        p.add_term(m1.clone(), rat(2));
        p.add_term(m1.clone(), rat(-2));
        assert!(p.is_zero());
        p.add_term(m1, rat(5));
        assert_eq!(p.len(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Substituting basis letters into the symbolic contraction
        /// reproduces the numeric contraction of the substituted word.
        #[test]
        fn specialization_matches_numeric_contraction(
            letters in proptest::collection::vec((0u8..8).prop_map(Letter::from_code), 4usize..=6),
            seed in any::<u64>(),
        ) {
            prop_assume!(letters.len() % 2 == 0);
            let degree = letters.len();
            let count = crate::matching::matchings_count(degree);
            let m = Matching::unrank(degree, seed % count).unwrap();

            // Distinct symbol per slot; substitute letters afterwards.
            let slots: Vec<u8> = (0..degree as u8).collect();
            let symbolic = symbolic_contract(&slots, &m).unwrap();

            let mut e = TensorElement::zero(degree);
            e.add_term(&TensorMonomial::from_letters(&letters).unwrap(), rat(1)).unwrap();
            let numeric = contract(&e, &m).unwrap();

            prop_assert_eq!(symbolic.specialize(&letters), numeric);
        }
    }
}
