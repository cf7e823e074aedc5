//! Integer factorization for Lehmer-number values.
//!
//! Trial division up to 10^6, then Brent's variant of Pollard rho. Primality of
//! cofactors uses Miller-Rabin on the first thirteen prime bases, which is a proof
//! for every n below 3,317,044,064,679,887,385,961,981. Cofactors above that bound
//! that survive every base, and cofactors rho cannot split within its iteration
//! budget, are returned as `unfactored` rather than guessed at.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::sync::OnceLock;

pub const TRIAL_LIMIT: u32 = 1_000_000;
const RHO_BUDGET: u64 = 1 << 22;
const MR_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// Upper limit for which `MR_BASES` is a deterministic primality test.
pub fn deterministic_bound() -> &'static BigUint {
    static BOUND: OnceLock<BigUint> = OnceLock::new();
    BOUND.get_or_init(|| "3317044064679887385961981".parse().unwrap())
}

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let limit = TRIAL_LIMIT as usize;
        let mut composite = vec![false; limit + 1];
        let mut out = Vec::new();
        for i in 2..=limit {
            if !composite[i] {
                out.push(i as u32);
                let mut j = i * i;
                while j <= limit {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        out
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    /// Prime factors with multiplicity, ascending.
    pub primes: Vec<(BigUint, u32)>,
    /// Composite (or unproven) cofactors that could not be split.
    pub unfactored: Vec<BigUint>,
}

impl Factorization {
    pub fn is_complete(&self) -> bool {
        self.unfactored.is_empty()
    }
}

/// `Some(true)` prime, `Some(false)` composite, `None` when the number is past the
/// deterministic bound and no base witnessed compositeness.
pub fn is_prime(n: &BigUint) -> Option<bool> {
    if let Some(small) = n.to_u64() {
        return Some(crate::arith::is_prime_u64(small));
    }
    if n.is_even() {
        return Some(false);
    }
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for a in MR_BASES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return Some(false);
    }
    if n < deterministic_bound() {
        Some(true)
    } else {
        None
    }
}

fn rho_split(n: &BigUint, c: u64) -> Option<BigUint> {
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let mut y = BigUint::from(2u32);
    let mut g = BigUint::one();
    let mut r: u64 = 1;
    let mut q = BigUint::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    let block = 128u64;
    let mut spent = 0u64;
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..block.min(r - k) {
                y = f(&y);
                let diff = if x > y { &x - &y } else { &y - &x };
                q = q * diff % n;
            }
            g = q.gcd(n);
            k += block;
            spent += block;
            if spent > RHO_BUDGET {
                return None;
            }
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            let diff = if x > ys { &x - &ys } else { &ys - &x };
            g = diff.gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

fn split_cofactor(n: BigUint, primes: &mut Vec<BigUint>, unfactored: &mut Vec<BigUint>) {
    if n.is_one() {
        return;
    }
    match is_prime(&n) {
        Some(true) => {
            primes.push(n);
            return;
        }
        None => {
            unfactored.push(n);
            return;
        }
        Some(false) => {}
    }
    if let Some(r) = crate::arith::exact_sqrt(&n) {
        split_cofactor(r.clone(), primes, unfactored);
        split_cofactor(r, primes, unfactored);
        return;
    }
    for c in 1..=8u64 {
        if let Some(f) = rho_split(&n, c) {
            let other = &n / &f;
            split_cofactor(f, primes, unfactored);
            split_cofactor(other, primes, unfactored);
            return;
        }
    }
    unfactored.push(n);
}

pub fn factorize(n: &BigUint) -> Factorization {
    let mut out = Factorization::default();
    if n.is_zero() || n.is_one() {
        return out;
    }
    let mut rest = n.clone();
    let mut found: Vec<BigUint> = Vec::new();
    for &p in small_primes() {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        loop {
            let (quot, rem) = rest.div_rem(&pb);
            if !rem.is_zero() {
                break;
            }
            found.push(pb.clone());
            rest = quot;
        }
    }
    split_cofactor(rest, &mut found, &mut out.unfactored);
    found.sort();
    for p in found {
        match out.primes.last_mut() {
            Some((last, e)) if *last == p => *e += 1,
            _ => out.primes.push((p, 1)),
        }
    }
    out.unfactored.sort();
    out
}
