//! The symplectic alphabet: letters `a_1, b_1, ..., a_g, b_g` and the
//! intersection form `mu` with `mu(a_i, b_j) = delta_ij`, antisymmetric.

use std::fmt;
use std::str::FromStr;

use num::BigRational;
use num::FromPrimitive;

use crate::error::CoreError;

/// Largest genus the packed representations support (letters fit in 5 bits
/// plus a sentinel bit, see `monomial`).
pub const MAX_GENUS: usize = 16;

/// Which half of a hyperbolic pair a letter belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    A,
    B,
}

/// One basis letter of `H`, e.g. `a_3` or `b_1`. Indices are 1-based.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    index: u8,
    kind: Kind,
}

impl Letter {
    pub fn new(kind: Kind, index: usize) -> Result<Self, CoreError> {
        if index == 0 || index > MAX_GENUS {
            return Err(CoreError::GenusRange(index));
        }
        Ok(Letter {
            index: index as u8,
            kind,
        })
    }

    pub fn a(index: usize) -> Self {
        Letter::new(Kind::A, index).expect("index within MAX_GENUS")
    }

    pub fn b(index: usize) -> Self {
        Letter::new(Kind::B, index).expect("index within MAX_GENUS")
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// 1-based hyperbolic pair index.
    pub fn index(&self) -> usize {
        self.index as usize
    }

    /// Dense 0-based code: `a_i -> 2(i-1)`, `b_i -> 2(i-1)+1`.
    pub fn code(&self) -> u8 {
        (self.index - 1) * 2 + if self.kind == Kind::B { 1 } else { 0 }
    }

    pub fn from_code(code: u8) -> Self {
        debug_assert!((code as usize) < 2 * MAX_GENUS);
        Letter {
            index: code / 2 + 1,
            kind: if code % 2 == 0 { Kind::A } else { Kind::B },
        }
    }

    /// The letter this one pairs with under `mu`: `a_i <-> b_i`.
    pub fn partner(&self) -> Self {
        Letter {
            index: self.index,
            kind: match self.kind {
                Kind::A => Kind::B,
                Kind::B => Kind::A,
            },
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            Kind::A => 'a',
            Kind::B => 'b',
        };
        write!(f, "{}{}", k, self.index)
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Letter {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let mut chars = s.chars();
        let kind = match chars.next() {
            Some('a') => Kind::A,
            Some('b') => Kind::B,
            _ => return Err(CoreError::Parse(format!("bad letter {s:?}"))),
        };
        let index: usize = chars
            .as_str()
            .parse()
            .map_err(|_| CoreError::Parse(format!("bad letter index in {s:?}")))?;
        Letter::new(kind, index)
    }
}

/// Genus of the underlying symplectic space; `H` has dimension `2 * genus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Genus(u8);

impl Genus {
    pub fn new(g: usize) -> Result<Self, CoreError> {
        if g == 0 || g > MAX_GENUS {
            return Err(CoreError::GenusRange(g));
        }
        Ok(Genus(g as u8))
    }

    pub fn get(&self) -> usize {
        self.0 as usize
    }

    /// Dimension of `H`.
    pub fn dim_h(&self) -> usize {
        2 * self.get()
    }

    pub fn contains(&self, l: Letter) -> bool {
        l.index() <= self.get()
    }

    /// All letters in code order: `a_1, b_1, a_2, b_2, ...`.
    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        (0..self.dim_h() as u8).map(Letter::from_code)
    }
}

impl fmt::Display for Genus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `mu` on basis letters, as an integer in {-1, 0, 1}.
pub fn mu_sign(x: Letter, y: Letter) -> i64 {
    if x.index() != y.index() {
        return 0;
    }
    match (x.kind(), y.kind()) {
        (Kind::A, Kind::B) => 1,
        (Kind::B, Kind::A) => -1,
        _ => 0,
    }
}

/// `mu` on basis letters as an exact rational.
pub fn mu_eval(x: Letter, y: Letter) -> BigRational {
    BigRational::from_i64(mu_sign(x, y)).expect("small integer")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mu_on_hyperbolic_pairs() {
        assert_eq!(mu_sign(Letter::a(1), Letter::b(1)), 1);
        assert_eq!(mu_sign(Letter::b(1), Letter::a(1)), -1);
        assert_eq!(mu_sign(Letter::a(1), Letter::b(2)), 0);
        assert_eq!(mu_sign(Letter::a(1), Letter::a(2)), 0);
        assert_eq!(mu_sign(Letter::a(3), Letter::a(3)), 0);
        assert_eq!(mu_sign(Letter::b(5), Letter::b(5)), 0);
    }

    #[test]
    fn mu_is_antisymmetric_on_all_letters() {
        let g = Genus::new(4).unwrap();
        for x in g.letters() {
            for y in g.letters() {
                assert_eq!(mu_sign(x, y), -mu_sign(y, x), "mu({x},{y})");
            }
        }
    }

    #[test]
    fn letter_codes_roundtrip_and_order() {
        let order: Vec<String> = Genus::new(2)
            .unwrap()
            .letters()
            .map(|l| l.to_string())
            .collect();
        assert_eq!(order, ["a1", "b1", "a2", "b2"]);
        for code in 0..32u8 {
            assert_eq!(Letter::from_code(code).code(), code);
        }
    }

    #[test]
    fn letter_parsing() {
        assert_eq!("a1".parse::<Letter>().unwrap(), Letter::a(1));
        assert_eq!("b16".parse::<Letter>().unwrap(), Letter::b(16));
        assert!("c1".parse::<Letter>().is_err());
        assert!("a0".parse::<Letter>().is_err());
        assert!("a17".parse::<Letter>().is_err());
        assert!("a".parse::<Letter>().is_err());
    }

    #[test]
    fn partner_swaps_kind() {
        assert_eq!(Letter::a(7).partner(), Letter::b(7));
        assert_eq!(Letter::b(7).partner(), Letter::a(7));
    }

    #[test]
    fn genus_bounds() {
        assert!(Genus::new(0).is_err());
        assert!(Genus::new(17).is_err());
        assert_eq!(Genus::new(16).unwrap().dim_h(), 32);
    }
}
