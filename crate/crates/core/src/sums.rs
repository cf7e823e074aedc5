//! The binomial sums R(d,u,v,k) and I(d,u,v,k) for odd k.
//!
//! With a = u^2 d and h = (k-1)/2 they read
//!
//! ```text
//! R = sum_j C(k, 2j)   a^(h-j) (-v^2)^j
//! I = sum_j C(k, 2j+1) a^(h-j) (-v^2)^j
//! ```
//!
//! and satisfy ((u sqrt(d) + s v i) / 2)^k = (X sqrt(d) + Y i) / 2 with
//! X = u R / 2^(k-1) and Y = s v I / 2^(k-1), s = +-1.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::binomial_row;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumInput {
    pub d: u64,
    pub u: BigUint,
    pub v: BigUint,
    pub k: u32,
}

impl SumInput {
    pub fn new(d: u64, u: impl Into<BigUint>, v: impl Into<BigUint>, k: u32) -> Result<Self> {
        let input = SumInput { d, u: u.into(), v: v.into(), k };
        input.validate()?;
        Ok(input)
    }

    fn validate(&self) -> Result<()> {
        if self.k.is_multiple_of(2) {
            return Err(Error::EvenIndex(self.k));
        }
        if self.d == 0 || self.u.is_zero() || self.v.is_zero() {
            return Err(Error::InvalidInstance("d, u, v must all be positive".into()));
        }
        Ok(())
    }

    /// u^2 d
    pub fn a(&self) -> BigInt {
        BigInt::from(&self.u * &self.u * self.d)
    }
}

/// Sum over j of C(k, 2j + offset) a^(h-j) w^j.
fn weighted_sum(a: &BigInt, w: &BigInt, k: u32, offset: u32) -> BigInt {
    let h = (k - 1) / 2;
    let row = binomial_row(k);
    let mut a_pows = Vec::with_capacity(h as usize + 1);
    a_pows.push(BigInt::one());
    for i in 0..h as usize {
        let next = &a_pows[i] * a;
        a_pows.push(next);
    }
    let mut w_pow = BigInt::one();
    let mut acc = BigInt::zero();
    for j in 0..=h {
        let c = BigInt::from(row[(2 * j + offset) as usize].clone());
        acc += c * &a_pows[(h - j) as usize] * &w_pow;
        w_pow *= w;
    }
    acc
}

/// R in terms of the Lehmer parameters a = u^2 d and b = -v^2 (any odd k).
pub fn r_from_params(a: &BigInt, b: &BigInt, k: u32) -> BigInt {
    weighted_sum(a, b, k, 0)
}

/// I in terms of a = u^2 d and b = -v^2.
pub fn i_from_params(a: &BigInt, b: &BigInt, k: u32) -> BigInt {
    weighted_sum(a, b, k, 1)
}

pub fn eval_r(input: &SumInput) -> Result<BigInt> {
    input.validate()?;
    let w = -BigInt::from(&input.v * &input.v);
    Ok(r_from_params(&input.a(), &w, input.k))
}

pub fn eval_i(input: &SumInput) -> Result<BigInt> {
    input.validate()?;
    let w = -BigInt::from(&input.v * &input.v);
    Ok(i_from_params(&input.a(), &w, input.k))
}

/// Outcome of checking the six residue laws of R and I.
///
/// The mod-d and mod-v^2 laws hold for every odd k. The mod-k laws rely on
/// k | C(k, i) for 0 < i < k and so hold for prime k (and trivially k = 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CongruenceReport {
    #[serde(with = "crate::serde_dec")]
    pub r: BigInt,
    #[serde(with = "crate::serde_dec")]
    pub i: BigInt,
    pub r_mod_k: bool,
    pub r_mod_d: bool,
    pub r_mod_v2: bool,
    pub i_mod_k: bool,
    pub i_mod_d: bool,
    pub i_mod_v2: bool,
    pub k_prime: bool,
}

impl CongruenceReport {
    pub fn all_pass(&self) -> bool {
        self.r_mod_k && self.r_mod_d && self.r_mod_v2 && self.i_mod_k && self.i_mod_d && self.i_mod_v2
    }
}

fn congruent(lhs: &BigInt, rhs: &BigInt, modulus: &BigInt) -> bool {
    (lhs - rhs).mod_floor(modulus).is_zero()
}

pub fn congruence_audit(input: &SumInput) -> Result<CongruenceReport> {
    let r = eval_r(input)?;
    let i = eval_i(input)?;
    let k = input.k;
    let h = (k - 1) / 2;
    let sign = if h.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
    let u = BigInt::from(input.u.clone());
    let v = BigInt::from(input.v.clone());
    let d = BigInt::from(input.d);
    let kk = BigInt::from(k);
    let v2 = &v * &v;

    // u^(k-1) d^((k-1)/2) and v^(k-1)
    let ud_term = u.pow(k - 1) * d.pow(h);
    let v_term = v.pow(k - 1);

    Ok(CongruenceReport {
        r_mod_k: congruent(&r, &ud_term, &kk),
        r_mod_d: congruent(&r, &(&sign * &kk * &v_term), &d),
        r_mod_v2: congruent(&r, &ud_term, &v2),
        i_mod_k: congruent(&i, &(&sign * &v_term), &kk),
        i_mod_d: congruent(&i, &(&sign * &v_term), &d),
        i_mod_v2: congruent(&i, &(&kk * &ud_term), &v2),
        k_prime: k == 1 || crate::arith::is_prime_u64(k as u64),
        r,
        i,
    })
}

/// A rational with power-of-two denominator, kept normalized (numerator odd or
/// exponent zero).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub num: BigInt,
    pub exp: u32,
}

impl Dyadic {
    pub fn new(num: BigInt, exp: u32) -> Self {
        let mut out = Dyadic { num, exp };
        if out.num.is_zero() {
            out.exp = 0;
        }
        while out.exp > 0 && out.num.is_even() {
            out.num >>= 1u32;
            out.exp -= 1;
        }
        out
    }

    pub fn to_integer(&self) -> Option<&BigInt> {
        (self.exp == 0).then_some(&self.num)
    }
}

impl std::fmt::Display for Dyadic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

/// c0 + c1 sqrt(d) + c2 i + c3 sqrt(d) i, all over 2^exp.
#[derive(Debug, Clone)]
struct QuadElem {
    c: [BigInt; 4],
    exp: u32,
}

impl QuadElem {
    fn one() -> Self {
        QuadElem { c: [BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::zero()], exp: 0 }
    }

    fn mul(&self, other: &QuadElem, d: &BigInt) -> QuadElem {
        let [a0, a1, a2, a3] = &self.c;
        let [b0, b1, b2, b3] = &other.c;
        // sqrt(d)^2 = d, i^2 = -1, (sqrt(d) i)^2 = -d
        let c0 = a0 * b0 + d * a1 * b1 - a2 * b2 - d * a3 * b3;
        let c1 = a0 * b1 + a1 * b0 - a2 * b3 - a3 * b2;
        let c2 = a0 * b2 + a2 * b0 + d * a1 * b3 + d * a3 * b1;
        let c3 = a0 * b3 + a3 * b0 + a1 * b2 + a2 * b1;
        QuadElem { c: [c0, c1, c2, c3], exp: self.exp + other.exp }
    }
}

/// Expands ((u sqrt(d) + sign * v i) / 2)^k by square-and-multiply and returns
/// (X, Y) with the power equal to (X sqrt(d) + Y i) / 2.
///
/// The result is cross-checked against [`eval_r`] / [`eval_i`]; a mismatch is an
/// internal error.
pub fn power_expand(d: u64, u: &BigUint, v: &BigUint, sign: i8, k: u32) -> Result<(Dyadic, Dyadic)> {
    let input = SumInput::new(d, u.clone(), v.clone(), k)?;
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidInstance(format!("sign must be +1 or -1, got {sign}")));
    }
    let dd = BigInt::from(d);
    let sv = BigInt::from_biguint(if sign > 0 { Sign::Plus } else { Sign::Minus }, v.clone());
    let base = QuadElem { c: [BigInt::zero(), BigInt::from(u.clone()), sv.clone(), BigInt::zero()], exp: 1 };

    let mut acc = QuadElem::one();
    let mut sq = base;
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&sq, &dd);
        }
        e >>= 1;
        if e > 0 {
            sq = sq.mul(&sq, &dd);
        }
    }
    if !acc.c[0].is_zero() || !acc.c[3].is_zero() {
        return Err(Error::Internal(format!("odd power left rational or sqrt(-d) part: {:?}", acc.c)));
    }
    // (c1 sqrt(d) + c2 i) / 2^k = (X sqrt(d) + Y i) / 2
    let [_, c1, c2, _] = acc.c;
    let x = Dyadic::new(c1, k - 1);
    let y = Dyadic::new(c2, k - 1);

    let expect_x = Dyadic::new(BigInt::from(u.clone()) * eval_r(&input)?, k - 1);
    let expect_y = Dyadic::new(&sv * eval_i(&input)?, k - 1);
    if x != expect_x || y != expect_y {
        return Err(Error::Internal(format!(
            "power expansion ({x}, {y}) disagrees with sums ({expect_x}, {expect_y})"
        )));
    }
    Ok((x, y))
}

/// Exact division by 2^(k-1) of |factor * sum|; `None` when not integral.
pub fn halve_exact(value: &BigInt, k: u32) -> Option<BigUint> {
    let mag = value.abs().to_biguint()?;
    let divisor = BigUint::one() << (k - 1);
    let (q, r) = mag.div_rem(&divisor);
    r.is_zero().then_some(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Straight transcription of the defining sums in i128 with Pascal-triangle
    /// binomials; shares no code with the implementation.
    fn naive(d: i128, u: i128, v: i128, k: u32) -> (i128, i128) {
        let mut pascal = vec![vec![1i128]];
        for n in 1..=k as usize {
            let prev = &pascal[n - 1];
            let mut row = vec![1i128; n + 1];
            for i in 1..n {
                row[i] = prev[i - 1] + prev[i];
            }
            pascal.push(row);
        }
        let c = &pascal[k as usize];
        let (mut r, mut i) = (0i128, 0i128);
        for j in 0..=((k - 1) / 2) {
            let common = d.pow((k - 1) / 2 - j) * (-v * v).pow(j) * u.pow(k - 2 * j - 1);
            r += c[2 * j as usize] * common;
            i += c[2 * j as usize + 1] * common;
        }
        (r, i)
    }

    fn inp(d: u64, u: u64, v: u64, k: u32) -> SumInput {
        SumInput::new(d, u, v, k).unwrap()
    }

    #[test]
    fn oracle_values() {
        assert_eq!(naive(7, 5, 3, 3), (148, 516));
        assert_eq!(naive(7, 1, 5, 5).0, 1424);
        assert_eq!(naive(7, 1, 1, 3).1, 20);
    }

    #[test]
    fn frozen_values() {
        assert_eq!(eval_r(&inp(7, 5, 3, 3)).unwrap(), BigInt::from(148));
        assert_eq!(eval_i(&inp(7, 5, 3, 3)).unwrap(), BigInt::from(516));
        assert_eq!(eval_r(&inp(7, 1, 5, 5)).unwrap(), BigInt::from(1424));
        assert_eq!(eval_i(&inp(7, 1, 1, 3)).unwrap(), BigInt::from(20));
        assert_eq!(eval_i(&inp(7, 1, 5, 5)).unwrap(), BigInt::from(-880));
        for (d, u, v) in [(3, 1, 1), (1731, 17, 9), (2, 4, 6)] {
            assert_eq!(eval_r(&inp(d, u, v, 1)).unwrap(), BigInt::one());
            assert_eq!(eval_i(&inp(d, u, v, 1)).unwrap(), BigInt::one());
        }
    }

    #[test]
    fn matches_naive_sums() {
        for k in [1, 3, 5, 7, 9, 11, 13] {
            for (d, u, v) in [(7, 5, 3), (11, 1, 2), (23, 3, 7), (1, 1, 1), (15, 2, 9)] {
                let (r, i) = naive(d as i128, u as i128, v as i128, k);
                assert_eq!(eval_r(&inp(d, u, v, k)).unwrap(), BigInt::from(r));
                assert_eq!(eval_i(&inp(d, u, v, k)).unwrap(), BigInt::from(i));
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(SumInput::new(7, 1u32, 1u32, 4), Err(Error::EvenIndex(4)));
        assert!(SumInput::new(7, 0u32, 1u32, 3).is_err());
        assert!(SumInput::new(0, 1u32, 1u32, 3).is_err());
    }

    #[test]
    fn congruences_worked_case() {
        let rep = congruence_audit(&inp(7, 5, 3, 3)).unwrap();
        assert!(rep.all_pass());
        assert_eq!(rep.r, BigInt::from(148));
        assert!(rep.k_prime);
    }

    #[test]
    fn mod_k_laws_need_prime_k() {
        // C(9,3) = 84 is not divisible by 9, so the mod-k laws fail for general input
        let rep = congruence_audit(&inp(7, 1, 1, 9)).unwrap();
        assert!(!rep.k_prime);
        assert!(rep.r_mod_d && rep.r_mod_v2 && rep.i_mod_d && rep.i_mod_v2);
        assert!(!(rep.r_mod_k && rep.i_mod_k));
    }

    #[test]
    fn power_expansion_examples() {
        let (x, y) = power_expand(7, &BigUint::from(5u32), &BigUint::from(3u32), 1, 3).unwrap();
        assert_eq!(x.to_integer(), Some(&BigInt::from(185)));
        assert_eq!(y.to_integer(), Some(&BigInt::from(387)));

        let (x, y) = power_expand(7, &BigUint::from(1u32), &BigUint::from(5u32), 1, 5).unwrap();
        assert_eq!(x.to_integer(), Some(&BigInt::from(89)));
        assert_eq!(y.to_integer(), Some(&BigInt::from(-275)));

        let (x, y) = power_expand(7, &BigUint::from(5u32), &BigUint::from(3u32), -1, 1).unwrap();
        assert_eq!(x.to_integer(), Some(&BigInt::from(5)));
        assert_eq!(y.to_integer(), Some(&BigInt::from(-3)));
    }

    #[test]
    fn dyadic_normalizes() {
        let half = Dyadic::new(BigInt::from(4), 3);
        assert_eq!(half, Dyadic { num: BigInt::one(), exp: 1 });
        assert_eq!(half.to_string(), "1/2^1");
        assert_eq!(Dyadic::new(BigInt::zero(), 5).to_integer(), Some(&BigInt::zero()));
    }
}
