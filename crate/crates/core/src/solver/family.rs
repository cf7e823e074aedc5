use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::classify::{classify, VerdictKind};
use super::instance::EquationInstance;
use super::shard::{chunks, run_cells};
use super::witness::SolutionWitness;
use crate::arith::exact_log;
use crate::error::{Error, Result};
use crate::factor::is_prime;
use crate::sums::{halve_exact, i_from_params, r_from_params};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilyBounds {
    pub u_max: u64,
    pub m_max: u32,
}

const U_CHUNK: u64 = 512;

/// Reads `quot` as q^n. With q open, accepts any odd prime power other than a
/// power of p; with n open, any positive exponent.
pub(crate) fn match_q_power(quot: &BigUint, p: u32, q: Option<u64>, n: Option<u32>) -> Option<(BigUint, u32)> {
    if quot <= &BigUint::one() {
        return None;
    }
    if let Some(q) = q {
        let q = BigUint::from(q);
        let e = exact_log(quot, &q)?;
        return (n.is_none() || n == Some(e)).then_some((q, e));
    }
    let bits = quot.bits() as u32;
    for e in 1..=bits {
        if n.is_some_and(|n| n != e) {
            continue;
        }
        let root = quot.nth_root(e);
        if root < BigUint::from(3u32) {
            break;
        }
        if root.pow(e) == *quot && root.is_odd() && root != BigUint::from(p) && is_prime(&root) == Some(true) {
            return Some((root, e));
        }
    }
    None
}

/// One member of the v = p^(m-1) family, if u passes the |I| = 2^(p-1) p q^n
/// test. The witness is rebuilt from x and y and re-verified by substitution.
#[allow(clippy::too_many_arguments)]
pub(crate) fn family_member(
    d: u64,
    p: u32,
    q: Option<u64>,
    n: Option<u32>,
    u: &BigUint,
    m: u32,
    exponent: u32,
    y: BigUint,
) -> Result<Option<SolutionWitness>> {
    let v = BigUint::from(p).pow(m - 1);
    if (u * d).gcd(&v) != BigUint::one() {
        return Ok(None);
    }
    let a = BigInt::from(u * u * d);
    let b = -BigInt::from(&v * &v);
    let i_val = i_from_params(&a, &b, p).abs().to_biguint().expect("absolute value");
    let scale = BigUint::from(2u32).pow(p - 1) * p;
    let (quot, rem) = i_val.div_rem(&scale);
    if !rem.is_zero() {
        return Ok(None);
    }
    let Some((q_big, n_found)) = match_q_power(&quot, p, q, n) else {
        return Ok(None);
    };
    let ur = BigInt::from(u.clone()) * r_from_params(&a, &b, p);
    let x = halve_exact(&ur, p)
        .ok_or_else(|| Error::Internal(format!("u R is not divisible by 2^{} for u = {u}, m = {m}", p - 1)))?;
    let w = SolutionWitness::assemble(d, p, x, y, Some((u.clone(), v)), m, n_found, q_big, exponent);
    if !w.verified {
        return Err(Error::Internal(format!("family member u = {u}, m = {m} fails substitution: {:?}", w.checks)));
    }
    Ok(Some(w))
}

/// Runs the family search over odd u <= u_max and 2 <= m <= m_max (or the
/// instance's m).
///
/// Refused instances are an error unless `force` is set. Other verdicts do
/// not stop the search; under a NO_SOLUTION verdict it simply comes back
/// empty.
pub fn enumerate_family(
    inst: &EquationInstance,
    bounds: &FamilyBounds,
    force: bool,
    workers: usize,
) -> Result<Vec<SolutionWitness>> {
    inst.validate()?;
    if inst.exponent() != inst.p {
        return Err(Error::InvalidInstance("N != p: use the exponent-N enumeration".into()));
    }
    let verdict = classify(inst)?;
    if verdict.kind == VerdictKind::HypothesisRefused && !force {
        return Err(Error::HypothesisRefused(verdict.detail));
    }
    let (d, p) = (inst.d, inst.p);
    if d % p as u64 == 0 || d % 4 != 3 {
        return Ok(Vec::new());
    }
    let ms: Vec<u32> = match inst.m {
        Some(m) if m >= 2 && m <= bounds.m_max => vec![m],
        Some(_) => Vec::new(),
        None => (2..=bounds.m_max).collect(),
    };
    let mut cells = Vec::new();
    for &m in &ms {
        for (lo, hi) in chunks(1, bounds.u_max, U_CHUNK) {
            cells.push((m, lo, hi));
        }
    }
    let results = run_cells(&cells, workers, |&(m, lo, hi)| {
        let v = BigUint::from(p).pow(m - 1);
        let v2 = &v * &v;
        let first = if lo % 2 == 1 { lo } else { lo + 1 };
        let mut out = Vec::new();
        for u in (first..=hi).step_by(2) {
            if u % p as u64 == 0 {
                continue;
            }
            let u = BigUint::from(u);
            let norm = &u * &u * d + &v2;
            if !(&norm % 4u32).is_zero() {
                continue;
            }
            let y = norm >> 2;
            match family_member(d, p, inst.q, inst.n, &u, m, p, y) {
                Ok(Some(w)) => out.push(Ok(w)),
                Ok(None) => {}
                Err(e) => out.push(Err(e)),
            }
        }
        out
    });
    let mut found = results.into_iter().collect::<Result<Vec<_>>>()?;
    found.sort_by_key(|w| (w.m, w.u.clone(), w.y.clone(), w.n));
    Ok(found)
}

/// Largest odd u worth trying if y must not exceed `y_max`.
pub(crate) fn u_bound_for_y(d: u64, y_max: u64) -> u64 {
    let cap = BigUint::from(y_max) * 4u32 / d;
    cap.sqrt().to_u64().unwrap_or(u64::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(u_max: u64, m_max: u32) -> FamilyBounds {
        FamilyBounds { u_max, m_max }
    }

    fn key(w: &SolutionWitness) -> (String, String, String, u32) {
        (w.x.to_string(), w.y.to_string(), w.u.as_ref().unwrap().to_string(), w.m)
    }

    #[test]
    fn worked_family_member() {
        let inst = EquationInstance::new(7, 3, 43).unwrap().with_n(1).unwrap();
        let found = enumerate_family(&inst, &bounds(9, 3), false, 1).unwrap();
        assert_eq!(found.iter().map(key).collect::<Vec<_>>(), vec![("185".into(), "46".into(), "5".into(), 2)]);
        let w = &found[0];
        assert!(w.checks.all_pass());
        // x = -u (mod 3)
        assert_eq!((&w.x % 3u32, w.u.as_ref().unwrap() % 3u32), (BigUint::from(2u32), BigUint::from(2u32)));
    }

    #[test]
    fn fifth_power_member() {
        // 7 * 89^2 + 5^4 11^2 = 4 * 8^5
        let inst = EquationInstance::new(7, 5, 11).unwrap().with_n(1).unwrap();
        let found = enumerate_family(&inst, &bounds(9, 3), false, 1).unwrap();
        assert_eq!(found.iter().map(key).collect::<Vec<_>>(), vec![("89".into(), "8".into(), "1".into(), 2)]);
    }

    #[test]
    fn open_n_and_open_q() {
        let inst = EquationInstance::new(7, 3, 43).unwrap();
        let found = enumerate_family(&inst, &bounds(9, 3), false, 1).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].n, 1);
        let inst = EquationInstance::without_q(7, 5).unwrap();
        let found = enumerate_family(&inst, &bounds(9, 2), false, 1).unwrap();
        assert!(found.iter().any(|w| w.q == BigUint::from(11u32) && w.x == BigUint::from(89u32)));
        assert!(found.iter().all(|w| w.verified));
    }

    #[test]
    fn refusal_and_force() {
        let inst = EquationInstance::new(23, 3, 5).unwrap().with_n(1).unwrap();
        assert!(matches!(enumerate_family(&inst, &bounds(9, 3), false, 1), Err(Error::HypothesisRefused(_))));
        let forced = enumerate_family(&inst, &bounds(9, 3), true, 1).unwrap();
        assert!(forced.iter().all(|w| w.verified));
    }

    #[test]
    fn worker_count_does_not_matter() {
        let inst = EquationInstance::without_q(7, 3).unwrap();
        let b = bounds(3000, 3);
        assert_eq!(enumerate_family(&inst, &b, false, 1).unwrap(), enumerate_family(&inst, &b, false, 4).unwrap());
    }

    #[test]
    fn q_power_matching() {
        let b = |n: u64| BigUint::from(n);
        assert_eq!(match_q_power(&b(43), 3, Some(43), Some(1)), Some((b(43), 1)));
        assert_eq!(match_q_power(&b(43 * 43), 3, Some(43), Some(1)), None);
        assert_eq!(match_q_power(&b(121), 5, None, None), Some((b(11), 2)));
        assert_eq!(match_q_power(&b(121), 5, Some(13), None), None);
        assert_eq!(match_q_power(&b(125), 5, None, None), None);
        assert_eq!(match_q_power(&b(15), 3, None, None), None);
    }
}
