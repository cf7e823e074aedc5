//! Cross-check of the family search against the brute-force oracle.
//!
//! Anything the oracle finds that the family search does not, or any witness
//! failing an invariant, is kept as a falsification with a transcript. None
//! are dropped.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use super::brute::{brute_force_search, SearchBounds};
use super::classify::VerdictKind;
use super::family::{u_bound_for_y, FamilyBounds};
use super::general::{classify_general, enumerate_general};
use super::instance::EquationInstance;
use super::witness::SolutionWitness;
use crate::arith::exact_sqrt;
use crate::error::Result;
use crate::lehmer::{exceptional_check, has_primitive_divisor, lehmer_number, pair_from_uv, ExceptionalVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConsistencyBounds {
    pub y_max: u64,
    /// Raised to the largest u whose family member can have y <= y_max.
    pub u_max: Option<u64>,
    pub m_max: u32,
    pub n_max: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConsistencyStatus {
    Consistent,
    Falsified,
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum FalsificationKind {
    /// The oracle found a solution outside the family.
    NotInFamily,
    /// A witness fails one of its invariant checks.
    InvariantFailure,
    /// A family member within the oracle's bounds was not found by the oracle.
    OracleMiss,
}

/// A way of writing 4 y^(E/p) = u^2 d + v^2 with v | p^m q^n, and what the
/// Lehmer pair (u^2 d, -v^2) does at index p.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Decomposition {
    #[serde(with = "crate::serde_dec")]
    pub u: BigUint,
    #[serde(with = "crate::serde_dec")]
    pub v: BigUint,
    pub p_exponent: u32,
    pub q_exponent: u32,
    #[serde(with = "crate::serde_dec::option")]
    pub lehmer_value: Option<BigInt>,
    /// |l_p| v = p^m q^n
    pub identity_holds: bool,
    pub has_primitive_divisor: Option<bool>,
    pub exceptional: Option<ExceptionalVerdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Falsification {
    pub kind: FalsificationKind,
    pub witness: SolutionWitness,
    pub decompositions: Vec<Decomposition>,
    pub transcript: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConsistencyReport {
    pub status: ConsistencyStatus,
    pub notice: Option<String>,
    pub verdict: VerdictKind,
    pub class_number: u64,
    pub bounds: ConsistencyBounds,
    pub u_max_used: u64,
    pub brute: Vec<SolutionWitness>,
    pub family: Vec<SolutionWitness>,
    pub matched: usize,
    pub falsifications: Vec<Falsification>,
}

type Key = (BigUint, BigUint, u32, u32);

fn key(w: &SolutionWitness) -> Key {
    (w.x.clone(), w.y.clone(), w.m, w.n)
}

fn decompose(d: u64, p: u32, w: &SolutionWitness) -> Vec<Decomposition> {
    let big_y = w.y.pow(w.exponent / p);
    let four_y = &big_y * 4u32;
    let target = BigUint::from(p).pow(w.m) * w.q.pow(w.n);
    let mut out = Vec::new();
    for i in 0..=w.m {
        for j in 0..=w.n {
            let v = BigUint::from(p).pow(i) * w.q.pow(j);
            let v2 = &v * &v;
            if v2 >= four_y {
                continue;
            }
            let (quot, rem) = (&four_y - &v2).div_rem(&BigUint::from(d));
            if !rem.is_zero() {
                continue;
            }
            let Some(u) = exact_sqrt(&quot) else { continue };
            if u.is_zero() {
                continue;
            }
            let mut dec = Decomposition {
                u: u.clone(),
                v: v.clone(),
                p_exponent: i,
                q_exponent: j,
                lehmer_value: None,
                identity_holds: false,
                has_primitive_divisor: None,
                exceptional: None,
            };
            if let Ok(pair) = pair_from_uv(d, &u, &v) {
                if let Ok(l) = lehmer_number(&pair, p as usize) {
                    dec.identity_holds = l.magnitude() * &v == target;
                    dec.lehmer_value = Some(l);
                }
                dec.has_primitive_divisor = has_primitive_divisor(&pair, p as usize).ok();
                dec.exceptional = exceptional_check(&pair, p).ok();
            }
            out.push(dec);
        }
    }
    out
}

fn transcript(d: u64, p: u32, w: &SolutionWitness, decs: &[Decomposition]) -> Vec<String> {
    let e = w.exponent;
    let mut lines = vec![
        format!(
            "{d} * {}^2 + {p}^{} * {}^{} = 4 * {}^{e}: {}",
            w.x,
            2 * w.m,
            w.q,
            2 * w.n,
            w.y,
            if w.checks.substitution { "holds" } else { "FAILS" }
        ),
        format!("checks: {:?}", w.checks),
        format!("family shape needs v = {p}^{} = {}", w.m - 1, BigUint::from(p).pow(w.m - 1)),
    ];
    if decs.is_empty() {
        lines.push(format!("4 y^{} = u^2 d + v^2 has no solution with v | p^m q^n", e / p));
    }
    for dec in decs {
        lines.push(format!(
            "4 y^{} = {d} * {}^2 + {}^2 with v = {p}^{} * {}^{}",
            e / p,
            dec.u,
            dec.v,
            dec.p_exponent,
            w.q,
            dec.q_exponent
        ));
        if let Some(l) = &dec.lehmer_value {
            lines.push(format!(
                "pair ({}, -{}): l_{p} = {l}, |l_{p}| * v = p^m q^n {}",
                &dec.u * &dec.u * d,
                &dec.v * &dec.v,
                if dec.identity_holds { "holds" } else { "fails" }
            ));
        } else {
            lines.push("(u^2 d, -v^2) is not a Lehmer pair".to_string());
        }
        match dec.has_primitive_divisor {
            Some(true) => lines.push(format!("l_{p} has a primitive divisor")),
            Some(false) => lines.push(format!("l_{p} has no primitive divisor")),
            None => {}
        }
        if let Some(ex) = &dec.exceptional {
            lines.push(format!("exceptional-pair check: {ex:?}"));
        }
    }
    lines
}

fn falsification(kind: FalsificationKind, d: u64, p: u32, w: &SolutionWitness) -> Falsification {
    let decompositions = decompose(d, p, w);
    Falsification { kind, transcript: transcript(d, p, w, &decompositions), decompositions, witness: w.clone() }
}

/// Runs the oracle and the family search side by side and compares them.
///
/// Skipped, with a notice, when the hypothesis gate refuses the instance or
/// d is not 3 mod 4. The instance needs q.
pub fn consistency_check(
    inst: &EquationInstance,
    bounds: &ConsistencyBounds,
    workers: usize,
) -> Result<ConsistencyReport> {
    inst.validate()?;
    inst.require_q()?;
    let (d, p) = (inst.d, inst.p);
    let verdict = classify_general(inst)?;
    let u_max_used = bounds.u_max.unwrap_or(0).max(u_bound_for_y(d, bounds.y_max));
    let mut report = ConsistencyReport {
        status: ConsistencyStatus::Skipped,
        notice: None,
        verdict: verdict.kind,
        class_number: verdict.class_number,
        bounds: *bounds,
        u_max_used,
        brute: Vec::new(),
        family: Vec::new(),
        matched: 0,
        falsifications: Vec::new(),
    };
    if verdict.kind == VerdictKind::HypothesisRefused {
        report.notice = Some(format!("HYPOTHESIS_REFUSED: {}", verdict.detail));
        return Ok(report);
    }
    if d % 4 != 3 {
        report.notice = Some(format!("d = {d} is not 3 mod 4; nothing to compare"));
        return Ok(report);
    }

    let brute = brute_force_search(
        inst,
        &SearchBounds { y_max: bounds.y_max, m_max: bounds.m_max, n_max: bounds.n_max },
        workers,
    )?;
    let family_bounds = FamilyBounds { u_max: u_max_used, m_max: bounds.m_max };
    let family: Vec<SolutionWitness> = enumerate_general(inst, &family_bounds, false, workers)?
        .into_iter()
        .filter(|w| w.y <= BigUint::from(bounds.y_max) && w.n <= inst.n.unwrap_or(bounds.n_max))
        .collect();

    let family_keys: BTreeSet<Key> = family.iter().map(key).collect();
    let brute_keys: BTreeSet<Key> = brute.iter().map(key).collect();
    for w in &brute {
        if !family_keys.contains(&key(w)) {
            report.falsifications.push(falsification(FalsificationKind::NotInFamily, d, p, w));
        } else if !w.checks.all_pass() {
            report.falsifications.push(falsification(FalsificationKind::InvariantFailure, d, p, w));
        } else {
            report.matched += 1;
        }
    }
    for w in &family {
        if !brute_keys.contains(&key(w)) {
            report.falsifications.push(falsification(FalsificationKind::OracleMiss, d, p, w));
        }
    }
    report.status =
        if report.falsifications.is_empty() { ConsistencyStatus::Consistent } else { ConsistencyStatus::Falsified };
    report.brute = brute;
    report.family = family;
    Ok(report)
}
