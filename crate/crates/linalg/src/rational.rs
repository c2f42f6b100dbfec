//! Exact rationals plus CRT and rational reconstruction.

use crate::error::LinalgError;
use num::bigint::Sign;
use num::{BigRational, Integer, One, Signed, Zero};

pub use num::BigInt;

/// Always lowest terms with positive denominator (maintained by `num`).
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parse "p/q" or a bare integer "p".
pub fn parse_rational(s: &str) -> Result<Rational, LinalgError> {
    let bad = || LinalgError::SnapshotParse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: BigInt = s.trim().parse().map_err(|_| bad())?;
            Ok(Rational::from(n))
        }
    }
}

/// Combine residues under pairwise-distinct prime moduli.
/// Returns (value in [0, M), M = product of the moduli).
pub fn crt_combine(residues: &[(u64, u64)]) -> (BigInt, BigInt) {
    assert!(!residues.is_empty());
    let mut x = BigInt::from(residues[0].0);
    let mut m = BigInt::from(residues[0].1);
    for &(r, p) in &residues[1..] {
        let p_big = BigInt::from(p);
        let r_big = BigInt::from(r);
        // x' = x + m * ((r - x) * m^-1 mod p)
        let inv = mod_inverse(&m, &p_big).expect("moduli not coprime");
        let mut t = ((&r_big - &x) * inv) % &p_big;
        if t.sign() == Sign::Minus {
            t += &p_big;
        }
        x += &m * t;
        m *= p_big;
    }
    (x, m)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        let mut x = e.x % m;
        if x.sign() == Sign::Minus {
            x += m;
        }
        Some(x)
    } else {
        None
    }
}

/// Recover n/d from n * d^-1 mod m with |n|, d <= sqrt(m/2), via the
/// half-extended Euclidean algorithm.  Returns None when no representative
/// within the bound exists.
pub fn rational_reconstruct(residue: &BigInt, modulus: &BigInt) -> Option<Rational> {
    let bound = (modulus / BigInt::from(2u8)).sqrt();
    let mut r0 = modulus.clone();
    let mut r1 = residue.mod_floor(modulus);
    let mut t0 = BigInt::zero();
    let mut t1 = BigInt::one();
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let (num, den) = if t1.sign() == Sign::Minus { (-r1, -t1) } else { (r1, t1) };
    if num.gcd(&den) != BigInt::one() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// CRT residues from several primes, then reconstruct a rational.
pub fn lift_mod_to_rational(residues: &[(u64, u64)]) -> Result<Rational, LinalgError> {
    let (x, m) = crt_combine(residues);
    rational_reconstruct(&x, &m)
        .ok_or(LinalgError::ReconstructionFailed { bits: m.bits() })
}

/// Residue of a rational mod p; fails when p divides the denominator.
pub fn rational_mod(v: &Rational, p: u64) -> Result<u64, LinalgError> {
    let p_big = BigInt::from(p);
    let d = v.denom().mod_floor(&p_big);
    if d.is_zero() {
        return Err(LinalgError::BadReduction { modulus: p });
    }
    let n = v.numer().mod_floor(&p_big);
    let n_u = u64::try_from(&n).expect("reduced residue fits u64");
    let d_u = u64::try_from(&d).expect("reduced residue fits u64");
    Ok(crate::modp::mulmod(n_u, crate::modp::invmod(d_u, p), p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modp::default_primes;
    use proptest::prelude::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("13/6").unwrap(), rat(13, 6));
        assert_eq!(parse_rational("-7/3").unwrap(), rat(-7, 3));
        assert_eq!(parse_rational("5").unwrap(), rat(5, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn reconstruct_examples() {
        let [p, _] = default_primes();
        // residue of 22/7 mod p
        let r = rational_mod(&rat(22, 7), p).unwrap();
        let lifted = lift_mod_to_rational(&[(r, p)]).unwrap();
        assert_eq!(lifted, rat(22, 7));
    }

    #[test]
    fn crt_two_primes() {
        let [p1, p2] = default_primes();
        let v = rat(-123456789, 1000003);
        let r1 = rational_mod(&v, p1).unwrap();
        let r2 = rational_mod(&v, p2).unwrap();
        assert_eq!(lift_mod_to_rational(&[(r1, p1), (r2, p2)]).unwrap(), v);
    }

    proptest! {
        #[test]
        fn reconstruction_roundtrip(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
            let [p1, p2] = default_primes();
            let v = rat(n, d);
            let r1 = rational_mod(&v, p1).unwrap();
            let r2 = rational_mod(&v, p2).unwrap();
            prop_assert_eq!(lift_mod_to_rational(&[(r1, p1), (r2, p2)]).unwrap(), v);
        }
    }
}
