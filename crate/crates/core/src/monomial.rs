//! Tensor monomials (words in the symplectic letters), packed into a `u128`.
//!
//! Slot `i` of a word occupies bits `6i..6i+6` and stores `code + 1`, so a
//! zero nibble never collides with the letter `a_1`. Degrees up to 21 fit.

use std::fmt;
use std::str::FromStr;

use crate::error::CoreError;
use crate::sym::Letter;

pub(crate) const LETTER_BITS: u32 = 6;
const SLOT_MASK: u128 = (1 << LETTER_BITS) - 1;

/// Hard cap on tensor degree imposed by the 128-bit packing.
pub const MAX_DEGREE: usize = 21;

/// A basis word of `H^{⊗ n}`, e.g. `a1 b3 a2`. Slot order is left to right.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TensorMonomial {
    word: u128,
    degree: u8,
}

impl TensorMonomial {
    pub fn empty() -> Self {
        TensorMonomial { word: 0, degree: 0 }
    }

    pub fn single(l: Letter) -> Self {
        TensorMonomial {
            word: (l.code() + 1) as u128,
            degree: 1,
        }
    }

    pub fn from_letters(letters: &[Letter]) -> Result<Self, CoreError> {
        if letters.len() > MAX_DEGREE {
            return Err(CoreError::DegreeTooLarge(letters.len()));
        }
        let mut word = 0u128;
        for (i, l) in letters.iter().enumerate() {
            word |= ((l.code() + 1) as u128) << (LETTER_BITS * i as u32);
        }
        Ok(TensorMonomial {
            word,
            degree: letters.len() as u8,
        })
    }

    /// Reassemble from a raw packed word. The caller must supply a word that
    /// `pack` produced for this degree.
    pub fn from_packed(word: u128, degree: usize) -> Self {
        debug_assert!(degree <= MAX_DEGREE);
        debug_assert_eq!(word >> (LETTER_BITS * degree as u32), 0);
        TensorMonomial {
            word,
            degree: degree as u8,
        }
    }

    pub fn packed(&self) -> u128 {
        self.word
    }

    pub fn degree(&self) -> usize {
        self.degree as usize
    }

    pub fn letter(&self, slot: usize) -> Letter {
        debug_assert!(slot < self.degree());
        let code = ((self.word >> (LETTER_BITS * slot as u32)) & SLOT_MASK) as u8;
        debug_assert!(code > 0);
        Letter::from_code(code - 1)
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.degree()).map(|i| self.letter(i)).collect()
    }

    pub fn concat(&self, other: &TensorMonomial) -> Result<Self, CoreError> {
        let degree = self.degree() + other.degree();
        if degree > MAX_DEGREE {
            return Err(CoreError::DegreeTooLarge(degree));
        }
        Ok(TensorMonomial {
            word: self.word | (other.word << (LETTER_BITS * self.degree as u32)),
            degree: degree as u8,
        })
    }

    /// `x ⊗ w -> w ⊗ x` on basis words: move the first slot to the end.
    pub fn rotate_first_to_end(&self) -> Self {
        debug_assert!(self.degree >= 1);
        let first = self.word & SLOT_MASK;
        TensorMonomial {
            word: (self.word >> LETTER_BITS) | (first << (LETTER_BITS * (self.degree as u32 - 1))),
            degree: self.degree,
        }
    }

    pub fn split_first(&self) -> (Letter, TensorMonomial) {
        debug_assert!(self.degree >= 1);
        (
            self.letter(0),
            TensorMonomial {
                word: self.word >> LETTER_BITS,
                degree: self.degree - 1,
            },
        )
    }

    /// Drop the first `n` slots.
    pub fn suffix(&self, n: usize) -> Self {
        debug_assert!(n <= self.degree());
        TensorMonomial {
            word: self.word >> (LETTER_BITS * n as u32),
            degree: self.degree - n as u8,
        }
    }

    /// Replace slot `i` by a whole word (Leibniz-style splice).
    pub fn replace_slot(&self, i: usize, repl: &TensorMonomial) -> Result<Self, CoreError> {
        debug_assert!(i < self.degree());
        let degree = self.degree() - 1 + repl.degree();
        if degree > MAX_DEGREE {
            return Err(CoreError::DegreeTooLarge(degree));
        }
        let low_mask = (1u128 << (LETTER_BITS * i as u32)) - 1;
        let low = self.word & low_mask;
        let high = self.word >> (LETTER_BITS * (i as u32 + 1));
        Ok(TensorMonomial {
            word: low
                | (repl.word << (LETTER_BITS * i as u32))
                | (high << (LETTER_BITS * (i + repl.degree()) as u32)),
            degree: degree as u8,
        })
    }
}

impl fmt::Display for TensorMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 0 {
            return write!(f, "1");
        }
        for i in 0..self.degree() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", self.letter(i))?;
        }
        Ok(())
    }
}

impl fmt::Debug for TensorMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for TensorMonomial {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let letters: Vec<Letter> = s
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<Result<_, _>>()?;
        TensorMonomial::from_letters(&letters)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sym::Genus;
    use proptest::prelude::*;

    fn m(s: &str) -> TensorMonomial {
        s.parse().unwrap()
    }

    #[test]
    fn display_and_parse_roundtrip() {
        let w = m("a1 b3 a2");
        assert_eq!(w.to_string(), "a1 b3 a2");
        assert_eq!(w.degree(), 3);
        assert_eq!(w.letter(0), Letter::a(1));
        assert_eq!(w.letter(1), Letter::b(3));
        assert_eq!(w.letter(2), Letter::a(2));
    }

    #[test]
    fn packing_is_injective_on_small_words() {
        use std::collections::HashSet;
        let g = Genus::new(3).unwrap();
        let letters: Vec<Letter> = g.letters().collect();
        let mut seen = HashSet::new();
        for x in &letters {
            for y in &letters {
                for z in &letters {
                    let w = TensorMonomial::from_letters(&[*x, *y, *z]).unwrap();
                    assert!(seen.insert(w.packed()), "collision at {w}");
                }
            }
        }
        assert_eq!(seen.len(), 6 * 6 * 6);
    }

    #[test]
    fn concat_and_rotate() {
        let left = m("a1 b1");
        let right = m("a2");
        assert_eq!(left.concat(&right).unwrap(), m("a1 b1 a2"));
        assert_eq!(m("a1 b1 a2").rotate_first_to_end(), m("b1 a2 a1"));
        assert_eq!(m("a1").rotate_first_to_end(), m("a1"));
    }

    #[test]
    fn replace_slot_splices_words() {
        let host = m("a1 b1 a2");
        assert_eq!(
            host.replace_slot(1, &m("b2 b3")).unwrap(),
            m("a1 b2 b3 a2")
        );
        assert_eq!(host.replace_slot(0, &m("a3")).unwrap(), m("a3 b1 a2"));
        assert_eq!(
            host.replace_slot(2, &m("a3 a4 a5")).unwrap(),
            m("a1 b1 a3 a4 a5")
        );
    }

    #[test]
    fn degree_limit_enforced() {
        let letters = vec![Letter::a(1); MAX_DEGREE + 1];
        assert!(TensorMonomial::from_letters(&letters).is_err());
        let full = TensorMonomial::from_letters(&vec![Letter::a(1); MAX_DEGREE]).unwrap();
        assert!(full.concat(&m("a1")).is_err());
    }

    proptest! {
        #[test]
        fn letters_roundtrip(codes in proptest::collection::vec(0u8..32, 0..=21)) {
            let letters: Vec<Letter> = codes.iter().map(|&c| Letter::from_code(c)).collect();
            let w = TensorMonomial::from_letters(&letters).unwrap();
            prop_assert_eq!(w.letters(), letters);
        }

        #[test]
        fn split_and_concat_invert(codes in proptest::collection::vec(0u8..32, 1..=21)) {
            let letters: Vec<Letter> = codes.iter().map(|&c| Letter::from_code(c)).collect();
            let w = TensorMonomial::from_letters(&letters).unwrap();
            let (first, rest) = w.split_first();
            prop_assert_eq!(TensorMonomial::single(first).concat(&rest).unwrap(), w);
        }
    }
}
