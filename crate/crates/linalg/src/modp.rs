//! Arithmetic in Z/p for word-size primes.

use std::sync::OnceLock;

#[inline(always)]
pub fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline(always)]
pub fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b; // safe: operands < p < 2^63
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline(always)]
pub fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

pub fn powmod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, p);
        }
        base = mulmod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse mod p, p prime, a not divisible by p.
#[inline]
pub fn invmod(a: u64, p: u64) -> u64 {
    debug_assert!(a % p != 0);
    powmod(a, p - 2, p)
}

/// Reduce a signed value into [0, p).
#[inline(always)]
pub fn reduce_i64(v: i64, p: u64) -> u64 {
    let r = v % p as i64;
    if r < 0 {
        (r + p as i64) as u64
    } else {
        r as u64
    }
}

/// Deterministic Miller-Rabin, valid for every n < 2^64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n % q == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Largest prime strictly below `n`.
pub fn prime_below(n: u64) -> u64 {
    assert!(n > 3);
    let mut c = if n % 2 == 0 { n - 1 } else { n - 2 };
    while !is_prime_u64(c) {
        c -= 2;
    }
    c
}

/// The two default working primes, the largest below 2^62.  Keeping them a
/// shade under 62 bits lets eliminations accumulate 15 products in u128
/// between reductions.
pub fn default_primes() -> [u64; 2] {
    static PRIMES: OnceLock<[u64; 2]> = OnceLock::new();
    *PRIMES.get_or_init(|| {
        let p1 = prime_below(1u64 << 62);
        let p2 = prime_below(p1);
        [p1, p2]
    })
}

/// Deterministic descending list of further primes for retries.
pub fn fallback_primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut p = default_primes()[1];
    for _ in 0..count {
        p = prime_below(p);
        out.push(p);
    }
    out
}
