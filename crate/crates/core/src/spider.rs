//! Spider generators: ordered leg lists that expand to derivations, their
//! splice bracket, and an independent derivation-composition oracle the
//! splice is validated against.
//!
//! The expansion of `S(u_1, .., u_n)` is the sum over positions `j` of
//! `u_j ⊗ [R(u_{j+1}, .., u_n), L(u_1, .., u_{j-1})]` where `R` is the
//! right-nested and `L` the left-nested bracketing, with the degenerate ends
//! `u_1 ⊗ R(u_2, .., u_n)` and `u_n ⊗ L(u_1, .., u_{n-1})`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use crate::element::Expansion;
use crate::error::CoreError;
use crate::lie::LieWord;
use crate::monomial::{TensorMonomial, LETTER_BITS, MAX_DEGREE};
use crate::sym::{mu_sign, Genus, Letter};

/// A spider with at least two legs. The leg sequence is kept exactly as
/// given: the expansion is not invariant under rotation or any other leg
/// permutation, so the order is part of the identity of the element.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spider {
    legs: Vec<Letter>,
}

impl Spider {
    pub fn new(legs: Vec<Letter>) -> Result<Self, CoreError> {
        if legs.len() < 2 {
            return Err(CoreError::TooFewLegs(legs.len()));
        }
        if legs.len() > MAX_DEGREE {
            return Err(CoreError::DegreeTooLarge(legs.len()));
        }
        Ok(Spider { legs })
    }

    pub fn legs(&self) -> &[Letter] {
        &self.legs
    }

    pub fn num_legs(&self) -> usize {
        self.legs.len()
    }

    /// Grading: a spider with `n` legs has weight `n - 2`.
    pub fn weight(&self) -> usize {
        self.legs.len() - 2
    }

    pub fn max_index(&self) -> usize {
        self.legs.iter().map(|l| l.index()).max().unwrap_or(1)
    }

    /// Per hyperbolic index, `#a_i == #b_i` among the legs. Unbalanced
    /// spiders pair to zero against every matching functional.
    pub fn is_balanced(&self) -> bool {
        let mut counts = [0i32; 2 * crate::sym::MAX_GENUS];
        for l in &self.legs {
            counts[l.code() as usize] += 1;
        }
        (0..crate::sym::MAX_GENUS).all(|i| counts[2 * i] == counts[2 * i + 1])
    }

    /// Expand into `H^{⊗ n}` by specializing the cached abstract expansion.
    pub fn expand(&self) -> Expansion {
        substitute_slots(&abstract_expansion(self.num_legs()), &self.legs)
    }

    /// Memoized [`Spider::expand`]; the cache is capped, so this is worth
    /// using only for spiders that recur (coordinate spiders, oracles).
    pub fn expand_cached(&self) -> Arc<Expansion> {
        static MEMO: OnceLock<RwLock<HashMap<(usize, u128), Arc<Expansion>>>> = OnceLock::new();
        const CAP: usize = 128;
        let memo = MEMO.get_or_init(|| RwLock::new(HashMap::new()));
        let key = (
            self.num_legs(),
            TensorMonomial::from_letters(&self.legs)
                .expect("legs within degree cap")
                .packed(),
        );
        if let Some(hit) = memo.read().expect("memo lock").get(&key) {
            return hit.clone();
        }
        let value = Arc::new(self.expand());
        let mut guard = memo.write().expect("memo lock");
        if guard.len() < CAP {
            guard.insert(key, value.clone());
        }
        value
    }
}

impl fmt::Display for Spider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S(")?;
        for (i, l) in self.legs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Spider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Spider {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let body = s
            .strip_prefix("S(")
            .and_then(|rest| rest.strip_suffix(')'))
            .ok_or_else(|| CoreError::Parse(format!("expected S(..), got {s:?}")))?;
        let legs: Vec<Letter> = body
            .split(',')
            .map(|t| t.trim().parse())
            .collect::<Result<_, _>>()?;
        Spider::new(legs)
    }
}

/// The expansion of the abstract `n`-leg spider, with slot `i`'s leg played
/// by the letter of code `i`. Concrete spiders substitute their legs in.
/// Cached per leg count; the weight-12 table has `14 * 2^12` terms.
pub fn abstract_expansion(n: usize) -> Arc<Expansion> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Expansion>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("cache lock");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(build_abstract_expansion(n)))
        .clone()
}

fn build_abstract_expansion(n: usize) -> Expansion {
    assert!((2..=MAX_DEGREE).contains(&n), "unsupported leg count {n}");
    assert!(n <= 2 * crate::sym::MAX_GENUS, "slots must fit letter codes");
    let slots: Vec<Letter> = (0..n as u8).map(Letter::from_code).collect();
    let mut raw: Vec<(u128, i64)> = Vec::with_capacity(n << (n.max(2) - 2));
    for j in 0..n {
        let right = &slots[j + 1..];
        let left = &slots[..j];
        let tail = match (right.is_empty(), left.is_empty()) {
            (false, true) => LieWord::right_nested(right).expand(),
            (true, false) => LieWord::left_nested(left).expand(),
            (false, false) => LieWord::bracket(
                LieWord::right_nested(right),
                LieWord::left_nested(left),
            )
            .expand(),
            (true, true) => unreachable!("spiders have at least 2 legs"),
        };
        let head = TensorMonomial::single(slots[j]);
        for (w, c) in tail.monomials() {
            raw.push((head.concat(&w).expect("degree n").packed(), c));
        }
    }
    Expansion::from_raw(n, raw)
}

/// Substitute concrete letters for the slot letters of an abstract expansion.
fn substitute_slots(abstract_terms: &Expansion, legs: &[Letter]) -> Expansion {
    let n = abstract_terms.degree();
    debug_assert_eq!(legs.len(), n);
    let mut map = [0u128; 64];
    for (i, l) in legs.iter().enumerate() {
        map[i + 1] = (l.code() + 1) as u128;
    }
    let mut raw = Vec::with_capacity(abstract_terms.len());
    for &(w, c) in abstract_terms.terms() {
        let mut out = 0u128;
        for slot in 0..n {
            let code = ((w >> (6 * slot)) & 63) as usize;
            out |= map[code] << (6 * slot);
        }
        raw.push((out, c));
    }
    Expansion::from_raw(n, raw)
}

/// An integer combination of spiders, e.g. the value of a bracket.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SpiderSum {
    terms: BTreeMap<Spider, i64>,
}

impl SpiderSum {
    pub fn new() -> Self {
        SpiderSum::default()
    }

    pub fn add(&mut self, spider: Spider, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let slot = self.terms.entry(spider).or_insert(0);
        *slot = slot.checked_add(coeff).expect("coefficient overflow");
        if *slot == 0 {
            let dead: Vec<Spider> = self
                .terms
                .iter()
                .filter(|(_, &c)| c == 0)
                .map(|(s, _)| s.clone())
                .collect();
            for s in dead {
                self.terms.remove(&s);
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Spider, i64)> {
        self.terms.iter().map(|(s, &c)| (s, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, k: i64) -> SpiderSum {
        let mut out = SpiderSum::new();
        for (s, c) in self.iter() {
            out.add(s.clone(), c.checked_mul(k).expect("coefficient overflow"));
        }
        out
    }

    pub fn add_sum(&mut self, other: &SpiderSum) {
        for (s, c) in other.iter() {
            self.add(s.clone(), c);
        }
    }

    /// Expand every spider and combine. All spiders must share a leg count.
    pub fn to_expansion(&self, degree: usize) -> Expansion {
        let mut acc = Expansion::zero(degree);
        for (s, c) in self.iter() {
            assert_eq!(s.num_legs(), degree, "mixed degrees in spider sum");
            acc = acc.add_scaled(&s.expand(), c);
        }
        acc
    }
}

impl fmt::Display for SpiderSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, c)) in self.iter().enumerate() {
            if i == 0 {
                if c < 0 {
                    write!(f, "- ")?;
                }
            } else if c < 0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if c.abs() != 1 {
                write!(f, "{}·", c.abs())?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// The bracketed word of every leg except `head`: `[R, L]` with `R` the
/// right-nested word of the atoms after `head` and `L` the left-nested word
/// of the atoms before it; pure `R` (resp. `L`) when `head` is first (last).
/// These are exactly the tails of the spider expansion, so a spider is
/// `Σ_j u_j ⊗ tail_j` over its legs.
fn nested_tail(atoms: &[LieWord], head: usize) -> LieWord {
    let after = &atoms[head + 1..];
    let before = &atoms[..head];
    match (after.is_empty(), before.is_empty()) {
        (false, false) => LieWord::bracket(
            LieWord::right_nested_words(after.to_vec()),
            LieWord::left_nested_words(before.to_vec()),
        ),
        (false, true) => LieWord::right_nested_words(after.to_vec()),
        (true, false) => LieWord::left_nested_words(before.to_vec()),
        (true, true) => unreachable!("a tail needs at least two atoms"),
    }
}

/// One term of the spider bracket: spiders P and Q joined along a chosen leg
/// pair. Its expansion replaces leg `left_leg` of P, in place inside each
/// tail of P's expansion, by the bracketed word of Q's remaining legs, and
/// symmetrically — heads run over the fourteen surviving legs:
///
/// `T = Σ_{j≠l} q_j ⊗ tail_j(q)[q_l := tail_l-word of P] + (P <-> Q)`.
///
/// A splice is generally *not* a single spider: the inserted block sits in
/// the tail as one nested factor, while a spider on the merged legs would
/// interleave the block letters into the ambient right/left nesting. The two
/// notions coincide only when the block lands at the innermost spot (e.g.
/// when the joined legs are adjacent to the ends), which covers the familiar
/// hand-worked identities but not generic leg positions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Splice {
    left: Spider,
    left_leg: usize,
    right: Spider,
    right_leg: usize,
}

impl Splice {
    pub fn new(
        left: Spider,
        left_leg: usize,
        right: Spider,
        right_leg: usize,
    ) -> Result<Self, CoreError> {
        let out_legs = left.num_legs() + right.num_legs() - 2;
        if out_legs < 2 || out_legs > MAX_DEGREE {
            return Err(CoreError::BracketDegree(left.num_legs(), right.num_legs()));
        }
        assert!(left_leg < left.num_legs() && right_leg < right.num_legs());
        Ok(Splice {
            left,
            left_leg,
            right,
            right_leg,
        })
    }

    pub fn left(&self) -> &Spider {
        &self.left
    }

    pub fn right(&self) -> &Spider {
        &self.right
    }

    pub fn left_leg(&self) -> usize {
        self.left_leg
    }

    pub fn right_leg(&self) -> usize {
        self.right_leg
    }

    /// Tensor degree of the expansion: total legs minus the joined pair.
    pub fn degree(&self) -> usize {
        self.left.num_legs() + self.right.num_legs() - 2
    }

    /// Heads over `legs` (skipping the joined leg), with the atom at the
    /// joined position replaced by `block` inside every tail.
    fn half_expansion(legs: &[Letter], joined: usize, block: &LieWord, raw: &mut Vec<(u128, i64)>) {
        let mut atoms: Vec<LieWord> = legs.iter().map(|&l| LieWord::letter(l)).collect();
        atoms[joined] = block.clone();
        for (j, &head) in legs.iter().enumerate() {
            if j == joined {
                continue;
            }
            let head_code = u128::from(head.code()) + 1;
            for &(w, c) in nested_tail(&atoms, j).expand().terms() {
                raw.push((head_code | (w << LETTER_BITS), c));
            }
        }
    }

    /// The element of the derivation algebra this splice denotes.
    pub fn expand(&self) -> Expansion {
        let as_atoms = |legs: &[Letter]| -> Vec<LieWord> {
            legs.iter().map(|&l| LieWord::letter(l)).collect()
        };
        let block_p = nested_tail(&as_atoms(self.left.legs()), self.left_leg);
        let block_q = nested_tail(&as_atoms(self.right.legs()), self.right_leg);
        let mut raw = Vec::new();
        Splice::half_expansion(self.right.legs(), self.right_leg, &block_p, &mut raw);
        Splice::half_expansion(self.left.legs(), self.left_leg, &block_q, &mut raw);
        Expansion::from_raw(self.degree(), raw)
    }
}

impl fmt::Display for Splice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Legs are reported 1-based, like the letters themselves.
        write!(
            f,
            "splice({}[{}], {}[{}])",
            self.left,
            self.left_leg + 1,
            self.right,
            self.right_leg + 1
        )
    }
}

/// An integer combination of splices: the shape of a bracket value.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BracketSum {
    degree: usize,
    terms: Vec<(i64, Splice)>,
}

impl BracketSum {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Splice)> {
        self.terms.iter().map(|(c, s)| (*c, s))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_expansion(&self) -> Expansion {
        let mut acc = Expansion::zero(self.degree);
        for (c, s) in self.iter() {
            acc = acc.add_scaled(&s.expand(), c);
        }
        acc
    }
}

/// The bracket of two spiders: `Σ mu(p_i, q_l) · splice(P[i], Q[l])` over all
/// leg pairs. Exactness is pinned to `derivation_commutator_oracle` by tests;
/// antisymmetry is structural because a splice is symmetric in its two sides.
pub fn spider_bracket(p: &Spider, q: &Spider) -> Result<BracketSum, CoreError> {
    let out_legs = p.num_legs() + q.num_legs() - 2;
    if out_legs < 2 || out_legs > MAX_DEGREE {
        return Err(CoreError::BracketDegree(p.num_legs(), q.num_legs()));
    }
    let mut terms = Vec::new();
    for i in 0..p.num_legs() {
        for l in 0..q.num_legs() {
            let sign = mu_sign(p.legs[i], q.legs[l]);
            if sign == 0 {
                continue;
            }
            terms.push((sign, Splice::new(p.clone(), i, q.clone(), l)?));
        }
    }
    Ok(BracketSum {
        degree: out_legs,
        terms,
    })
}

/// A derivation of the free Lie algebra, tabulated by its images on letters.
/// This is the slow, obviously-correct route to the bracket: compose
/// derivations and read the commutator off, never touching the splice rule.
pub struct DerivationTable {
    genus: Genus,
    /// Image degree: one less than the tensor degree of the defining element.
    out_degree: usize,
    /// Indexed by letter code.
    images: Vec<Expansion>,
}

impl DerivationTable {
    /// Tabulate `x -> Σ mu(u, x) w` over the terms `u ⊗ w` of `e`.
    pub fn from_element(e: &Expansion, genus: Genus) -> Self {
        let out_degree = e.degree() - 1;
        let mut raw: Vec<Vec<(u128, i64)>> = vec![Vec::new(); genus.dim_h()];
        for (m, c) in e.monomials() {
            let (u, w) = m.split_first();
            debug_assert!(genus.contains(u), "letter outside genus");
            // mu(u, x) is nonzero only for x = partner(u).
            let x = u.partner();
            raw[x.code() as usize].push((w.packed(), mu_sign(u, x) * c));
        }
        DerivationTable {
            genus,
            out_degree,
            images: raw
                .into_iter()
                .map(|v| Expansion::from_raw(out_degree, v))
                .collect(),
        }
    }

    pub fn image_of(&self, l: Letter) -> &Expansion {
        &self.images[l.code() as usize]
    }

    /// Leibniz extension to a tensor word.
    pub fn apply_to_word(&self, m: &TensorMonomial, scale: i64, raw: &mut Vec<(u128, i64)>) {
        for slot in 0..m.degree() {
            let image = self.image_of(m.letter(slot));
            for (wi, ci) in image.monomials() {
                let spliced = m.replace_slot(slot, &wi).expect("degree within cap");
                raw.push((spliced.packed(), scale.checked_mul(ci).expect("overflow")));
            }
        }
    }

    pub fn apply_to_expansion(&self, e: &Expansion) -> Expansion {
        let out_degree = e.degree() + self.out_degree - 1;
        let mut raw = Vec::new();
        for (m, c) in e.monomials() {
            self.apply_to_word(&m, c, &mut raw);
        }
        Expansion::from_raw(out_degree, raw)
    }

    /// The commutator `x -> P(Q(x)) - Q(P(x))`, tabulated on letters.
    pub fn commutator(p: &DerivationTable, q: &DerivationTable) -> DerivationTable {
        assert_eq!(p.genus, q.genus, "tables over different alphabets");
        let out_degree = p.out_degree + q.out_degree - 1;
        let images = p
            .genus
            .letters()
            .map(|x| {
                p.apply_to_expansion(q.image_of(x))
                    .add_scaled(&q.apply_to_expansion(p.image_of(x)), -1)
            })
            .collect();
        DerivationTable {
            genus: p.genus,
            out_degree,
            images,
        }
    }

    /// Reassemble the defining tensor element: `Σ_i a_i ⊗ D(b_i) - b_i ⊗ D(a_i)`.
    pub fn to_element(&self) -> Expansion {
        let mut raw = Vec::new();
        for i in 1..=self.genus.get() {
            for (head, tail_letter, sign) in [
                (Letter::a(i), Letter::b(i), 1i64),
                (Letter::b(i), Letter::a(i), -1i64),
            ] {
                let head = TensorMonomial::single(head);
                for (w, c) in self.image_of(tail_letter).monomials() {
                    raw.push((head.concat(&w).expect("degree within cap").packed(), sign * c));
                }
            }
        }
        Expansion::from_raw(self.out_degree + 1, raw)
    }
}

/// The bracket of two spiders computed through derivation composition alone.
pub fn derivation_commutator_oracle(
    p: &Spider,
    q: &Spider,
    genus: Genus,
) -> Result<Expansion, CoreError> {
    Ok(commutator_element(&p.expand(), &q.expand(), genus))
}

/// The bracket of two arbitrary elements, through derivation composition.
/// Lets tests take iterated brackets (Jacobi) without a splice for
/// non-spider operands.
pub fn commutator_element(x: &Expansion, y: &Expansion, genus: Genus) -> Expansion {
    let tx = DerivationTable::from_element(x, genus);
    let ty = DerivationTable::from_element(y, genus);
    DerivationTable::commutator(&tx, &ty).to_element()
}
