//! Small exact-arithmetic helpers shared by the other modules.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Floor square root, checked by squaring.
pub fn isqrt(n: &BigUint) -> BigUint {
    let r = n.sqrt();
    debug_assert!(&r * &r <= *n && (&r + 1u32) * (&r + 1u32) > *n);
    r
}

/// Returns the root when `n` is a perfect square.
pub fn exact_sqrt(n: &BigUint) -> Option<BigUint> {
    // Squares mod 64 are {0,1,4,9,16,17,25,33,36,41,49,57}; cheap reject first.
    let low = (n.iter_u64_digits().next().unwrap_or(0) & 63) as u8;
    if !matches!(low, 0 | 1 | 4 | 9 | 16 | 17 | 25 | 33 | 36 | 41 | 49 | 57) {
        return None;
    }
    let r = isqrt(n);
    (&r * &r == *n).then_some(r)
}

pub fn exact_sqrt_signed(n: &BigInt) -> Option<BigUint> {
    if n.is_negative() {
        return None;
    }
    exact_sqrt(n.magnitude())
}

pub fn is_squarefree(d: u64) -> bool {
    if d == 0 {
        return false;
    }
    let mut n = d;
    let mut f = 2u64;
    while f.saturating_mul(f) <= n {
        if n.is_multiple_of(f) {
            n /= f;
            if n.is_multiple_of(f) {
                return false;
            }
        }
        f += 1;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

pub fn ibig(n: i64) -> BigInt {
    BigInt::from(n)
}

/// Multiplicative order of `q` modulo the prime `p` (q not divisible by p).
pub fn multiplicative_order(q: u64, p: u64) -> u64 {
    let mut x = q % p;
    let mut k = 1;
    while x != 1 {
        x = mul_mod(x, q % p, p);
        k += 1;
    }
    k
}

/// If `n` is a positive power of `base`, returns the exponent.
pub fn exact_log(n: &BigUint, base: &BigUint) -> Option<u32> {
    if n.is_zero() || base <= &BigUint::one() {
        return None;
    }
    let mut rest = n.clone();
    let mut e = 0;
    while !rest.is_one() {
        let (quot, rem) = rest.div_rem(base);
        if !rem.is_zero() {
            return None;
        }
        rest = quot;
        e += 1;
    }
    (e > 0).then_some(e)
}

/// Binomial coefficient by the exact multiplicative recurrence.
pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Row `C(n, 0..=n)`.
pub fn binomial_row(n: u32) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for i in 0..n {
        c = c * (n - i) / (i + 1);
        row.push(c.clone());
    }
    row
}

/// Least non-negative residue of a signed big integer.
pub fn rem_euclid(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}
