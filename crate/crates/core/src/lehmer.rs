//! Lehmer pairs and Lehmer numbers.
//!
//! A pair is carried by its parameters a = (alpha + beta)^2, b = (alpha - beta)^2
//! and M = alpha * beta = (a - b) / 4. Lehmer numbers obey l_1 = l_2 = 1 and
//!
//! ```text
//! l_{n+2} = a l_{n+1} - M l_n   (n odd)
//! l_{n+2} =   l_{n+1} - M l_n   (n even)
//! ```

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::fmt;

use crate::arith::{exact_log, is_prime_u64};
use crate::error::{Error, Result};
use crate::factor::factorize;
use crate::fib::{fib_lucas_signed, inverse_lookup, Sequence};
use crate::sums::i_from_params;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum PairDefect {
    ZeroParameter,
    NotCongruentMod4,
    EqualParameters,
    NotCoprime,
    /// alpha / beta is a root of unity.
    Degenerate,
}

impl fmt::Display for PairDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PairDefect::ZeroParameter => "a and b must be nonzero",
            PairDefect::NotCongruentMod4 => "a - b must be divisible by 4",
            PairDefect::EqualParameters => "a = b, so alpha * beta = 0",
            PairDefect::NotCoprime => "a and M = (a - b)/4 are not coprime",
            PairDefect::Degenerate => "alpha/beta is a root of unity",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LehmerPair {
    #[serde(with = "crate::serde_dec")]
    pub a: BigInt,
    #[serde(with = "crate::serde_dec")]
    pub b: BigInt,
    /// alpha * beta
    #[serde(rename = "M", with = "crate::serde_dec")]
    pub m: BigInt,
}

/// Checks the Lehmer-pair conditions on (a, b), reporting the first failure.
///
/// alpha/beta is a root of z^2 - (a/M - 2) z + 1. A root of unity is an algebraic
/// integer, which with gcd(a, M) = 1 forces |M| = 1; it then needs
/// a/M - 2 = 2 cos(theta) in {-2, -1, 0, 1, 2}, i.e. a*M in {1, 2, 3, 4}.
pub fn validate_pair(a: &BigInt, b: &BigInt) -> std::result::Result<(), PairDefect> {
    if a.is_zero() || b.is_zero() {
        return Err(PairDefect::ZeroParameter);
    }
    let (m, rem) = (a - b).div_rem(&BigInt::from(4));
    if !rem.is_zero() {
        return Err(PairDefect::NotCongruentMod4);
    }
    if m.is_zero() {
        return Err(PairDefect::EqualParameters);
    }
    if !a.gcd(&m).is_one() {
        return Err(PairDefect::NotCoprime);
    }
    if m.abs().is_one() {
        let am = a * &m;
        if am >= BigInt::one() && am <= BigInt::from(4) {
            return Err(PairDefect::Degenerate);
        }
    }
    Ok(())
}

impl LehmerPair {
    pub fn new(a: BigInt, b: BigInt) -> Result<Self> {
        validate_pair(&a, &b).map_err(Error::InvalidPair)?;
        let m = (&a - &b) / 4;
        Ok(LehmerPair { a, b, m })
    }

    pub fn from_i64(a: i64, b: i64) -> Result<Self> {
        Self::new(BigInt::from(a), BigInt::from(b))
    }

    /// The pair obtained by multiplying alpha and beta by sqrt(-1).
    pub fn rotated(&self) -> LehmerPair {
        LehmerPair { a: -&self.a, b: -&self.b, m: -&self.m }
    }
}

/// The pair of ((u sqrt(d) +- v i) / 2, conjugate): parameters (u^2 d, -v^2).
pub fn pair_from_uv(d: u64, u: &BigUint, v: &BigUint) -> Result<LehmerPair> {
    let ud = BigUint::from(d) * u;
    if !ud.gcd(v).is_one() {
        return Err(Error::InvalidInstance(format!("gcd(u*d, v) != 1 for d={d}, u={u}, v={v}")));
    }
    let a = BigInt::from(u * u * d);
    let b = -BigInt::from(v * v);
    if !(&a - &b).is_multiple_of(&BigInt::from(4)) {
        return Err(Error::InvalidInstance(format!("u^2 d + v^2 not divisible by 4 for d={d}, u={u}, v={v}")));
    }
    LehmerPair::new(a, b)
}

/// l_1, ..., l_n.
pub fn lehmer_sequence(pair: &LehmerPair, n: usize) -> Vec<BigInt> {
    let mut seq: Vec<BigInt> = Vec::with_capacity(n);
    for idx in 1..=n {
        let next = if idx <= 2 {
            BigInt::one()
        } else {
            let prev = &seq[idx - 2];
            let prev2 = &seq[idx - 3];
            // idx - 2 is the "n" of the recurrence
            if (idx - 2) % 2 == 1 {
                &pair.a * prev - &pair.m * prev2
            } else {
                prev - &pair.m * prev2
            }
        };
        seq.push(next);
    }
    seq
}

pub fn lehmer_number(pair: &LehmerPair, n: usize) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::IndexOutOfRange("Lehmer index must be >= 1".into()));
    }
    Ok(lehmer_sequence(pair, n).pop().unwrap())
}

/// sum_j C(n, 2j+1) a^((n-1)/2 - j) b^j / 2^(n-1) for odd n; `None` when the
/// division is not exact (it always is for a valid pair).
pub fn closed_form_odd(pair: &LehmerPair, n: u32) -> Option<BigInt> {
    if n.is_multiple_of(2) {
        return None;
    }
    let s = i_from_params(&pair.a, &pair.b, n);
    let (q, r) = s.div_rem(&(BigInt::one() << (n - 1)));
    r.is_zero().then_some(q)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PrimitiveDivisorReport {
    pub n: usize,
    #[serde(with = "crate::serde_dec")]
    pub lehmer_value: BigInt,
    /// Largest divisor of l_n coprime to a*b*l_1*...*l_{n-1}.
    #[serde(with = "crate::serde_dec")]
    pub primitive_part: BigUint,
    #[serde(with = "crate::serde_dec::vec")]
    pub primitive_divisors: Vec<BigUint>,
    /// Pieces of the primitive part that could not be factored; every prime in
    /// them is primitive, but they are not listed individually.
    #[serde(with = "crate::serde_dec::vec")]
    pub unfactored: Vec<BigUint>,
    pub defect: bool,
}

impl PrimitiveDivisorReport {
    pub fn factorization_complete(&self) -> bool {
        self.unfactored.is_empty()
    }
}

fn strip_common(mut r: BigUint, blocker: &BigUint) -> BigUint {
    if blocker.is_zero() {
        return r;
    }
    loop {
        let g = r.gcd(blocker);
        if g.is_one() {
            return r;
        }
        r /= g;
    }
}

/// (l_n, largest divisor of l_n coprime to a*b*l_1*...*l_{n-1}).
fn primitive_part(pair: &LehmerPair, n: usize) -> Result<(BigInt, BigUint)> {
    if n == 0 {
        return Err(Error::IndexOutOfRange("Lehmer index must be >= 1".into()));
    }
    let seq = lehmer_sequence(pair, n);
    let value = seq[n - 1].clone();
    let mut part = value.magnitude().clone();
    part = strip_common(part, (&pair.a * &pair.b).magnitude());
    for earlier in &seq[..n - 1] {
        if part.is_one() {
            break;
        }
        part = strip_common(part, earlier.magnitude());
    }
    Ok((value, part))
}

/// Whether l_n has a primitive divisor, without factoring anything.
pub fn has_primitive_divisor(pair: &LehmerPair, n: usize) -> Result<bool> {
    Ok(!primitive_part(pair, n)?.1.is_one())
}

/// Primitive prime divisors of l_n.
///
/// Whether a primitive divisor exists is decided exactly by stripping from |l_n|
/// every prime it shares with a*b and the earlier terms; only the listing of the
/// individual primes depends on factorization.
pub fn primitive_divisors(pair: &LehmerPair, n: usize) -> Result<PrimitiveDivisorReport> {
    let (value, part) = primitive_part(pair, n)?;
    let fac = factorize(&part);
    let primes: Vec<BigUint> = fac.primes.iter().map(|(p, _)| p.clone()).collect();
    let nb = BigUint::from(n);
    for p in &primes {
        let r = p % &nb;
        assert!(n <= 2 || r.is_one() || r == &nb - 1u32, "primitive divisor {p} of l_{n} is not +-1 mod {n}");
    }
    Ok(PrimitiveDivisorReport {
        n,
        lehmer_value: value,
        defect: part.is_one(),
        primitive_part: part,
        primitive_divisors: primes,
        unfactored: fac.unfactored,
    })
}

/// Equivalence up to multiplying alpha and beta by the same element of
/// {+-1, +-sqrt(-1)}; the first fixes (a, b), the second negates both.
pub fn pairs_equivalent(p1: &LehmerPair, p2: &LehmerPair) -> bool {
    (p1.a == p2.a && p1.b == p2.b) || (p1.a == -&p2.a && p1.b == -&p2.b)
}

/// Parameter tables of pairs whose l_7 / l_13 may lack a primitive divisor.
pub const DEFECTIVE_TABLE_7: [(i64, i64); 6] = [(1, -7), (1, -19), (3, -5), (5, -7), (13, -3), (14, -22)];
pub const DEFECTIVE_TABLE_13: [(i64, i64); 1] = [(1, -7)];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "camelCase")]
pub enum DefectFamily {
    /// Listed explicitly for p = 7 or p = 13.
    Table { p: u32, a: i64, b: i64 },
    /// p = 3: (1 + t, 1 - 3t), t not in {0, 1}.
    ThreeLinear {
        #[serde(with = "crate::serde_dec")]
        t: BigInt,
    },
    /// p = 3: (3^k + t, 3^k - 3t), t != 0, 3 does not divide t, (k, t) != (1, 1).
    ThreePower {
        k: u32,
        #[serde(with = "crate::serde_dec")]
        t: BigInt,
    },
    /// p = 5: (F_{k-2e}, F_{k-2e} - 4 F_k), k >= 3.
    FiveFibonacci { k: usize, eps: i8 },
    /// p = 5: (L_{k-2e}, L_{k-2e} - 4 L_k), k != 1.
    FiveLucas { k: usize, eps: i8 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExceptionalVerdict {
    MustHavePrimitive,
    PossiblyDefective {
        #[serde(flatten)]
        family: DefectFamily,
        /// true when the match was against (-a, -b)
        rotated: bool,
    },
}

fn three_families(a: &BigInt, b: &BigInt) -> Option<DefectFamily> {
    let one = BigInt::one();
    let t = a - &one;
    if *b == BigInt::from(4) - BigInt::from(3) * a && !t.is_zero() && !t.is_one() {
        return Some(DefectFamily::ThreeLinear { t });
    }
    let s = BigInt::from(3) * a + b;
    let (q, r) = s.div_rem(&BigInt::from(4));
    if !r.is_zero() || !q.is_positive() {
        return None;
    }
    let power = q.to_biguint()?;
    let k = if power.is_one() { 0 } else { exact_log(&power, &BigUint::from(3u32))? };
    let t = a - BigInt::from(power);
    let three_divides = t.is_multiple_of(&BigInt::from(3));
    if t.is_zero() || three_divides || (k == 1 && t.is_one()) {
        return None;
    }
    Some(DefectFamily::ThreePower { k, t })
}

fn five_families(a: &BigInt, b: &BigInt) -> Option<DefectFamily> {
    let m: BigInt = (a - b) / 4;
    let m = m.to_biguint()?;
    for k in inverse_lookup(&m, Sequence::Fib) {
        if k < 3 {
            continue;
        }
        for eps in [1i8, -1] {
            let (f_shift, _) = fib_lucas_signed(k as i64 - 2 * eps as i64);
            if &f_shift == a {
                return Some(DefectFamily::FiveFibonacci { k, eps });
            }
        }
    }
    for k in inverse_lookup(&m, Sequence::Lucas) {
        if k == 1 {
            continue;
        }
        for eps in [1i8, -1] {
            let (_, l_shift) = fib_lucas_signed(k as i64 - 2 * eps as i64);
            if &l_shift == a {
                return Some(DefectFamily::FiveLucas { k, eps });
            }
        }
    }
    None
}

fn family_for(a: &BigInt, b: &BigInt, p: u32) -> Option<DefectFamily> {
    match p {
        3 => three_families(a, b),
        5 => five_families(a, b),
        7 | 13 => {
            let table: &[(i64, i64)] = if p == 7 { &DEFECTIVE_TABLE_7 } else { &DEFECTIVE_TABLE_13 };
            let (a, b) = (a.to_i64()?, b.to_i64()?);
            table.iter().find(|&&entry| entry == (a, b)).map(|&(a, b)| DefectFamily::Table { p, a, b })
        }
        _ => None,
    }
}

/// Can l_p of a pair with parameters (a, b) fail to have a primitive divisor?
///
/// Works on raw parameters; the p = 3 and p = 5 families contain parameter
/// values that are not themselves valid pairs.
///
/// p > 30 always has one. Among primes below 30 only 3, 5, 7 and 13 admit
/// exceptions, matched here up to equivalence.
pub fn exceptional_params(a: &BigInt, b: &BigInt, p: u32) -> Result<ExceptionalVerdict> {
    if p < 3 || !is_prime_u64(p as u64) {
        return Err(Error::NotOddPrime { name: "p", value: p as u64 });
    }
    if let Some(family) = family_for(a, b, p) {
        return Ok(ExceptionalVerdict::PossiblyDefective { family, rotated: false });
    }
    if let Some(family) = family_for(&-a, &-b, p) {
        return Ok(ExceptionalVerdict::PossiblyDefective { family, rotated: true });
    }
    Ok(ExceptionalVerdict::MustHavePrimitive)
}

pub fn exceptional_check(pair: &LehmerPair, p: u32) -> Result<ExceptionalVerdict> {
    exceptional_params(&pair.a, &pair.b, p)
}
