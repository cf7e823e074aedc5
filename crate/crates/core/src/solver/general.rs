//! The exponent-N equation d x^2 + p^(2m) q^(2n) = 4 y^N with p | N.
//!
//! Writing N = p t and Y = y^t reduces it to the exponent-p case, and the
//! family member's u must in turn come from u' with
//! 2^(t-1) p^(m-1) = |I(d, u', 1, t)|.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed};
use serde::Serialize;

use super::classify::{classify, elementary_verdict, evaluate_criterion, Criterion, Verdict, VerdictKind};
use super::family::{enumerate_family, family_member, FamilyBounds};
use super::instance::EquationInstance;
use super::shard::run_cells;
use super::witness::SolutionWitness;
use crate::arith::{gcd_u64, is_prime_u64};
use crate::class_number::class_number;
use crate::error::{Error, Result};
use crate::sums::{halve_exact, i_from_params, r_from_params};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GeneralInfo {
    /// N / p
    pub t: u32,
    pub delta: u8,
    /// 2^(t-1) p^(m-1), when m is known
    #[serde(with = "crate::serde_dec::option")]
    pub target: Option<BigUint>,
    #[serde(with = "crate::serde_dec::option")]
    pub u_prime_bound: Option<BigUint>,
    #[serde(with = "crate::serde_dec::vec")]
    pub u_primes: Vec<BigUint>,
    pub condition: String,
}

impl GeneralInfo {
    fn new(t: u32, condition: impl Into<String>) -> Self {
        GeneralInfo {
            t,
            delta: u8::from(t == 1),
            target: None,
            u_prime_bound: None,
            u_primes: Vec::new(),
            condition: condition.into(),
        }
    }
}

/// Every odd u' with |I(d, u', 1, t)| = target satisfies u'^2 d <= target + 1.
///
/// The sum is congruent to +-1 modulo a = u'^2 d (its only term free of a is
/// (-1)^((t-1)/2)), so a divides target -+ 1, which is positive for target > 1.
pub fn u_prime_bound(target: &BigUint, d: u64) -> BigUint {
    ((target + 1u32) / d).sqrt()
}

fn target_for(p: u32, m: u32, t: u32) -> BigUint {
    BigUint::from(2u32).pow(t - 1) * BigUint::from(p).pow(m - 1)
}

/// All odd u' up to the bound meeting the condition.
fn u_prime_search(d: u64, target: &BigUint, t: u32) -> Vec<BigUint> {
    let bound = u_prime_bound(target, d);
    let near = [target - 1u32, target + 1u32];
    let minus_one = -BigInt::one();
    let mut out = Vec::new();
    let mut u = BigUint::one();
    while u <= bound {
        let a = &u * &u * d;
        if near.iter().any(|n| n.is_multiple_of(&a)) {
            let i_val = i_from_params(&BigInt::from(a), &minus_one, t);
            if i_val.magnitude() == target {
                out.push(u.clone());
            }
        }
        u += 2u32;
    }
    out
}

fn small_prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut f = 3;
    while f * f <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += 2;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Shared front half of the general classification: verdicts that do not
/// depend on m, or `Err(h)` to continue.
fn general_prefix(inst: &EquationInstance) -> Result<std::result::Result<Verdict, u64>> {
    let h = class_number(inst.d)?.h;
    let t = inst.cofactor();
    let big_n = inst.exponent() as u64;
    if let Some(mut v) = elementary_verdict(inst, h) {
        v.general = Some(GeneralInfo::new(t, "decided before the exponent condition"));
        return Ok(Ok(v));
    }
    let g = gcd_u64(big_n, 2 * h);
    if g != 1 {
        let mut v = Verdict::new(
            VerdictKind::HypothesisRefused,
            format!("gcd(N, 2h(-{})) = gcd({big_n}, {}) = {g}; the classification does not apply", inst.d, 2 * h),
            h,
        );
        v.general = Some(GeneralInfo::new(t, "hypothesis gate"));
        return Ok(Ok(v));
    }
    Ok(Err(h))
}

/// Classifies d x^2 + p^(2m) q^(2n) = 4 y^N. N = p gives exactly the verdict
/// of [`classify`].
pub fn classify_general(inst: &EquationInstance) -> Result<Verdict> {
    inst.validate()?;
    let (p, t) = (inst.p, inst.cofactor());
    if t == 1 {
        let mut plain = inst.clone();
        plain.big_n = None;
        return classify(&plain);
    }
    let h = match general_prefix(inst)? {
        Ok(v) => return Ok(v),
        Err(h) => h,
    };
    let criterion = evaluate_criterion(inst.q, inst.n, p);
    if let Criterion::Fails { residue } = criterion {
        let mut v = Verdict::new(VerdictKind::NoSolutionCriterion, format!("q^n = {residue} (mod {p}), not +-1"), h);
        v.criterion = criterion;
        v.general = Some(GeneralInfo::new(t, "q^n = +-1 (mod p) fails"));
        return Ok(v);
    }
    let finish = |kind, detail: String, info: GeneralInfo| {
        let mut v = Verdict::new(kind, detail, h);
        v.criterion = criterion.clone();
        v.general = Some(info);
        v
    };
    let Some(m) = inst.m else {
        return Ok(finish(
            VerdictKind::CandidateFamily,
            "m not given; the u' condition depends on m".into(),
            GeneralInfo::new(t, "2^(t-1) p^(m-1) = |I(d, u', 1, t)| for some odd u'"),
        ));
    };
    if m == 1 {
        return Ok(finish(
            VerdictKind::NoSolutionCriterion,
            "the exponent-p family needs m >= 2".into(),
            GeneralInfo::new(t, "m >= 2"),
        ));
    }
    if !is_prime_u64(t as u64) {
        for l in small_prime_factors(t) {
            let target = target_for(p, m, l);
            if u_prime_search(inst.d, &target, l).is_empty() {
                let mut info =
                    GeneralInfo::new(t, format!("2^({l}-1) p^(m-1) = |I(d, u', 1, {l})| has no odd solution"));
                info.u_prime_bound = Some(u_prime_bound(&target, inst.d));
                info.target = Some(target);
                return Ok(finish(
                    VerdictKind::NoSolutionCriterion,
                    format!("the prime factor {l} of N/p = {t} admits no u'"),
                    info,
                ));
            }
        }
        return Ok(finish(
            VerdictKind::NoSolutionCriterion,
            format!("N/p = {t} is composite; solutions need N/p prime"),
            GeneralInfo::new(t, "N/p prime"),
        ));
    }
    let target = target_for(p, m, t);
    let mut info = GeneralInfo::new(t, "2^(t-1) p^(m-1) = |I(d, u', 1, t)| for some odd u'");
    info.u_prime_bound = Some(u_prime_bound(&target, inst.d));
    info.u_primes = u_prime_search(inst.d, &target, t);
    info.target = Some(target.clone());
    if info.u_primes.is_empty() {
        return Ok(finish(
            VerdictKind::NoSolutionCriterion,
            format!("no odd u' satisfies 2^{} * {p}^{} = |I(d, u', 1, {t})|", t - 1, m - 1),
            info,
        ));
    }
    let list = info.u_primes.iter().map(|u| u.to_string()).collect::<Vec<_>>().join(", ");
    Ok(finish(VerdictKind::CandidateFamily, format!("u' in {{{list}}} meets the exponent-{t} condition"), info))
}

/// Solutions of the exponent-N equation. N = p runs [`enumerate_family`];
/// otherwise m ranges over the instance's m or 2..=m_max, u' over its proven
/// bound, and `bounds.u_max` is not needed.
pub fn enumerate_general(
    inst: &EquationInstance,
    bounds: &FamilyBounds,
    force: bool,
    workers: usize,
) -> Result<Vec<SolutionWitness>> {
    inst.validate()?;
    let (d, p, t) = (inst.d, inst.p, inst.cofactor());
    if t == 1 {
        let mut plain = inst.clone();
        plain.big_n = None;
        return enumerate_family(&plain, bounds, force, workers);
    }
    match general_prefix(inst)? {
        Ok(v) if v.kind == VerdictKind::HypothesisRefused && !force => {
            return Err(Error::HypothesisRefused(v.detail));
        }
        Ok(v) if v.kind.is_no_solution() => return Ok(Vec::new()),
        _ => {}
    }
    if !is_prime_u64(t as u64) {
        return Ok(Vec::new());
    }
    let ms: Vec<u32> = match inst.m {
        Some(m) => vec![m],
        None => (2..=bounds.m_max).collect(),
    };
    let ms: Vec<u32> = ms.into_iter().filter(|&m| m >= 2).collect();
    let exponent = inst.exponent();
    let results = run_cells(&ms, workers, |&m| {
        let target = target_for(p, m, t);
        let mut out = Vec::new();
        for u_prime in u_prime_search(d, &target, t) {
            out.push(member_from_u_prime(inst, &u_prime, m, t, exponent));
        }
        out
    });
    let mut found = Vec::new();
    for r in results {
        if let Some(w) = r? {
            found.push(w);
        }
    }
    found.sort_by_key(SolutionWitness::sort_key);
    Ok(found)
}

fn member_from_u_prime(
    inst: &EquationInstance,
    u_prime: &BigUint,
    m: u32,
    t: u32,
    exponent: u32,
) -> Result<Option<SolutionWitness>> {
    let d = inst.d;
    let a = BigInt::from(u_prime * u_prime * d);
    let minus_one = -BigInt::one();
    let scaled = BigInt::from(u_prime.clone()) * r_from_params(&a, &minus_one, t).abs();
    let u = halve_exact(&scaled, t)
        .ok_or_else(|| Error::Internal(format!("u' R(d, u', 1, {t}) is not divisible by 2^{}", t - 1)))?;
    let norm = a.magnitude() + 1u32;
    if !norm.is_multiple_of(&BigUint::from(4u32)) {
        return Err(Error::Internal(format!("u'^2 d + 1 is not divisible by 4 for u' = {u_prime}")));
    }
    let y = norm >> 2;
    let Some(mut w) = family_member(d, inst.p, inst.q, inst.n, &u, m, exponent, y)? else {
        return Ok(None);
    };
    w.u_prime = Some(u_prime.clone());
    w.t = Some(t);
    w.delta = Some(0);
    Ok(Some(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn general(d: u64, p: u32, big_n: u32, m: u32) -> EquationInstance {
        EquationInstance::without_q(d, p).unwrap().with_exponent(big_n).unwrap().with_m(m).unwrap()
    }

    const B: FamilyBounds = FamilyBounds { u_max: 9, m_max: 3 };

    #[test]
    fn worked_exponent_fifteen() {
        let inst = general(7, 5, 15, 2);
        let v = classify_general(&inst).unwrap();
        assert_eq!(v.kind, VerdictKind::CandidateFamily);
        let info = v.general.unwrap();
        assert_eq!(info.u_primes, vec![BigUint::one()]);
        assert_eq!(info.target, Some(BigUint::from(20u32)));
        let found = enumerate_general(&inst, &B, false, 1).unwrap();
        assert_eq!(found.len(), 1);
        let w = &found[0];
        assert_eq!((w.x.clone(), w.y.clone()), (BigUint::from(89u32), BigUint::from(2u32)));
        assert_eq!((w.q.clone(), w.n, w.u.clone()), (BigUint::from(11u32), 1, Some(BigUint::one())));
        assert_eq!((w.u_prime.clone(), w.t, w.delta), (Some(BigUint::one()), Some(3), Some(0)));
        assert!(w.checks.all_pass(), "{:?}", w.checks);
    }

    #[test]
    fn wrong_q_gives_nothing() {
        let mut inst = general(7, 5, 15, 2);
        inst.q = Some(13);
        assert!(enumerate_general(&inst, &B, false, 1).unwrap().is_empty());
    }

    #[test]
    fn no_u_prime_for_m_three() {
        let v = classify_general(&general(7, 5, 15, 3)).unwrap();
        assert_eq!(v.kind, VerdictKind::NoSolutionCriterion);
        assert!(v.general.unwrap().u_primes.is_empty());
    }

    #[test]
    fn exponent_p_matches_plain_path() {
        let inst = EquationInstance::new(7, 3, 43).unwrap().with_n(1).unwrap();
        let with_n = inst.clone().with_exponent(3).unwrap();
        assert_eq!(classify_general(&with_n).unwrap(), classify(&inst).unwrap());
        assert_eq!(enumerate_general(&with_n, &B, false, 1).unwrap(), enumerate_family(&inst, &B, false, 1).unwrap());
    }

    #[test]
    fn gate_uses_n() {
        // h(-23) = 3 divides N = 15 even though p = 5 does not divide h
        let inst = general(23, 5, 15, 2);
        assert_eq!(classify_general(&inst).unwrap().kind, VerdictKind::HypothesisRefused);
        assert!(matches!(enumerate_general(&inst, &B, false, 1), Err(Error::HypothesisRefused(_))));
    }

    #[test]
    fn bound_is_exhaustive() {
        // every odd u' meeting the condition, found by a wide scan, is within the bound
        for d in [3u64, 7, 11, 19, 43] {
            for t in [3u32, 5, 7] {
                let minus_one = -BigInt::one();
                for u in (1u64..400).step_by(2) {
                    let i = i_from_params(&BigInt::from(u * u * d), &minus_one, t);
                    let target = i.magnitude().clone();
                    if target > BigUint::one() {
                        assert!(BigUint::from(u) <= u_prime_bound(&target, d), "d={d} t={t} u={u}");
                    }
                }
            }
        }
    }
}
