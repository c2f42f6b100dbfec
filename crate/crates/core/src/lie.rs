//! The free Lie algebra on the symplectic letters: bracket words, their
//! expansions into tensor monomials, Witt dimensions, and the kernel map that
//! cuts out the derivation algebra inside `H ⊗ L_{k+1}`.

use std::fmt;
use std::str::FromStr;

use crate::element::{Expansion, TensorElement};
use crate::error::CoreError;
use crate::monomial::TensorMonomial;
use crate::sym::{Genus, Letter};

/// A formal bracket word, e.g. `[a1,[a2,a3]]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum LieWord {
    Letter(Letter),
    Bracket(Box<LieWord>, Box<LieWord>),
}

impl LieWord {
    pub fn letter(l: Letter) -> Self {
        LieWord::Letter(l)
    }

    pub fn bracket(u: LieWord, v: LieWord) -> Self {
        LieWord::Bracket(Box::new(u), Box::new(v))
    }

    /// `[[..[x1,x2],..],xn]`.
    pub fn left_nested(letters: &[Letter]) -> Self {
        LieWord::left_nested_words(letters.iter().map(|&l| LieWord::Letter(l)).collect())
    }

    /// `[x1,[x2,[..,xn]..]]`.
    pub fn right_nested(letters: &[Letter]) -> Self {
        LieWord::right_nested_words(letters.iter().map(|&l| LieWord::Letter(l)).collect())
    }

    /// Left-nested bracketing of arbitrary sub-words.
    pub fn left_nested_words(words: Vec<LieWord>) -> Self {
        assert!(!words.is_empty());
        let mut it = words.into_iter();
        let mut acc = it.next().unwrap();
        for w in it {
            acc = LieWord::bracket(acc, w);
        }
        acc
    }

    /// Right-nested bracketing of arbitrary sub-words.
    pub fn right_nested_words(words: Vec<LieWord>) -> Self {
        assert!(!words.is_empty());
        let mut it = words.into_iter().rev();
        let mut acc = it.next().unwrap();
        for w in it {
            acc = LieWord::bracket(w, acc);
        }
        acc
    }

    pub fn degree(&self) -> usize {
        match self {
            LieWord::Letter(_) => 1,
            LieWord::Bracket(u, v) => u.degree() + v.degree(),
        }
    }

    /// Expand into the tensor algebra: `[u,v] -> uv - vu`, recursively.
    pub fn expand(&self) -> Expansion {
        let (degree, raw) = self.expand_raw();
        Expansion::from_raw(degree, raw)
    }

    fn expand_raw(&self) -> (usize, Vec<(u128, i64)>) {
        match self {
            LieWord::Letter(l) => (1, vec![(TensorMonomial::single(*l).packed(), 1)]),
            LieWord::Bracket(u, v) => {
                let (du, eu) = u.expand_raw();
                let (dv, ev) = v.expand_raw();
                let degree = du + dv;
                assert!(degree <= crate::monomial::MAX_DEGREE, "bracket too deep");
                let mut raw = Vec::with_capacity(2 * eu.len() * ev.len());
                let shift_u = 6 * du as u32;
                let shift_v = 6 * dv as u32;
                for &(wu, cu) in &eu {
                    for &(wv, cv) in &ev {
                        raw.push((wu | (wv << shift_u), cu * cv));
                        raw.push((wv | (wu << shift_v), -cu * cv));
                    }
                }
                (degree, raw)
            }
        }
    }
}

impl fmt::Display for LieWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LieWord::Letter(l) => write!(f, "{l}"),
            LieWord::Bracket(u, v) => write!(f, "[{u},{v}]"),
        }
    }
}

impl fmt::Debug for LieWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for LieWord {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (word, used) = parse_lie(&bytes, 0)?;
        if used != bytes.len() {
            return Err(CoreError::Parse(format!(
                "trailing input after bracket word in {s:?}"
            )));
        }
        Ok(word)
    }
}

fn parse_lie(s: &[char], pos: usize) -> Result<(LieWord, usize), CoreError> {
    match s.get(pos) {
        Some('[') => {
            let (left, after_left) = parse_lie(s, pos + 1)?;
            if s.get(after_left) != Some(&',') {
                return Err(CoreError::Parse("expected ',' in bracket".into()));
            }
            let (right, after_right) = parse_lie(s, after_left + 1)?;
            if s.get(after_right) != Some(&']') {
                return Err(CoreError::Parse("expected ']' closing bracket".into()));
            }
            Ok((LieWord::bracket(left, right), after_right + 1))
        }
        Some('a') | Some('b') => {
            let mut end = pos + 1;
            while end < s.len() && s[end].is_ascii_digit() {
                end += 1;
            }
            let token: String = s[pos..end].iter().collect();
            Ok((LieWord::Letter(token.parse()?), end))
        }
        other => Err(CoreError::Parse(format!(
            "unexpected {other:?} in bracket word"
        ))),
    }
}

/// Dimension of the degree-`n` graded piece of the free Lie algebra on
/// `2 * genus` letters (the Witt formula).
pub fn lie_dim(n: usize, genus: Genus) -> u64 {
    assert!(n >= 1);
    let q = genus.dim_h() as u128;
    let mut total: i128 = 0;
    for d in 1..=n {
        if n % d == 0 {
            total += i128::from(moebius(d)) * q.pow((n / d) as u32) as i128;
        }
    }
    debug_assert!(total >= 0 && total % n as i128 == 0);
    u64::try_from(total / n as i128).expect("Witt dimension fits u64")
}

fn moebius(n: usize) -> i8 {
    let mut n = n;
    let mut primes = 0;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            primes += 1;
        }
        p += 1;
    }
    if n > 1 {
        primes += 1;
    }
    if primes % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The defining quotient map restricted to degree `k + 2` tensors:
/// `x ⊗ w -> x ⊗ w - w ⊗ x` on monomials. The derivation algebra in degree
/// `k` is exactly its kernel inside `H ⊗ L_{k+1}`.
pub fn bracket_map(e: &TensorElement) -> TensorElement {
    let mut out = TensorElement::zero(e.degree());
    for (m, c) in e.iter_sorted() {
        out.add_term(&m, c.clone()).expect("same degree");
        out.add_term(&m.rotate_first_to_end(), -c.clone())
            .expect("same degree");
    }
    out
}

/// Integer-coefficient version of [`bracket_map`] for large expansions.
pub fn bracket_map_expansion(e: &Expansion) -> Expansion {
    let mut raw = Vec::with_capacity(2 * e.len());
    for (m, c) in e.monomials() {
        raw.push((m.packed(), c));
        raw.push((m.rotate_first_to_end().packed(), -c));
    }
    Expansion::from_raw(e.degree(), raw)
}

/// Whether `e` lies in the kernel of [`bracket_map`]. Callers are expected to
/// hand in elements of `H ⊗ L_{k+1}`; within that subspace the kernel is the
/// degree-`k` piece of the derivation algebra.
pub fn is_h_member(e: &TensorElement) -> bool {
    bracket_map(e).is_zero()
}

/// The symplectic class `Σ_i [a_i, b_i]` expanded into tensors.
pub fn omega_expansion(genus: Genus) -> Expansion {
    let mut acc = Expansion::zero(2);
    for i in 1..=genus.get() {
        let w = LieWord::bracket(
            LieWord::Letter(Letter::a(i)),
            LieWord::Letter(Letter::b(i)),
        );
        acc = acc.add_scaled(&w.expand(), 1);
    }
    acc
}

/// [`omega_expansion`] with rational coefficients.
pub fn omega(genus: Genus) -> TensorElement {
    omega_expansion(genus).to_element()
}

/// Lyndon words and their standard bracketings. Only the validation suite
/// uses these, as an independent route to free-Lie dimensions.
pub mod lyndon {
    use super::*;

    /// All Lyndon words of length exactly `n` over the genus alphabet, in
    /// lexicographic (letter-code) order. Duval's generation.
    pub fn lyndon_words(n: usize, genus: Genus) -> Vec<Vec<Letter>> {
        let k = genus.dim_h() as u8;
        let mut out = Vec::new();
        let mut w: Vec<u8> = vec![0];
        loop {
            if w.len() == n {
                out.push(w.iter().map(|&c| Letter::from_code(c)).collect());
            }
            // Extend periodically to full length, then increment the tail.
            let m = w.len();
            while w.len() < n {
                let c = w[w.len() - m];
                w.push(c);
            }
            while let Some(&last) = w.last() {
                if last == k - 1 {
                    w.pop();
                } else {
                    break;
                }
            }
            match w.last_mut() {
                Some(last) => *last += 1,
                None => return out,
            }
        }
    }

    /// Standard (right) factorization bracketing of a Lyndon word.
    pub fn standard_bracketing(word: &[Letter]) -> LieWord {
        assert!(!word.is_empty());
        if word.len() == 1 {
            return LieWord::Letter(word[0]);
        }
        // Split before the longest proper suffix that is itself Lyndon.
        let codes: Vec<u8> = word.iter().map(|l| l.code()).collect();
        let split = longest_lyndon_suffix_start(&codes);
        LieWord::bracket(
            standard_bracketing(&word[..split]),
            standard_bracketing(&word[split..]),
        )
    }

    fn longest_lyndon_suffix_start(codes: &[u8]) -> usize {
        for start in 1..codes.len() {
            if is_lyndon(&codes[start..]) {
                return start;
            }
        }
        unreachable!("every word of length >= 2 has a Lyndon last letter");
    }

    fn is_lyndon(w: &[u8]) -> bool {
        (1..w.len()).all(|r| w[..].lt(&w[r..])) && !w.is_empty()
    }
}
