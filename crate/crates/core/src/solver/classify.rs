use serde::Serialize;

use super::general::{classify_general, GeneralInfo};
use super::instance::EquationInstance;
use super::witness::SolutionWitness;
use crate::arith::{multiplicative_order, pow_mod};
use crate::class_number::class_number;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerdictKind {
    NoSolutionResidue,
    NoSolutionPDividesD,
    NoSolutionCriterion,
    CandidateFamily,
    HypothesisRefused,
}

impl VerdictKind {
    pub fn is_no_solution(self) -> bool {
        matches!(
            self,
            VerdictKind::NoSolutionResidue | VerdictKind::NoSolutionPDividesD | VerdictKind::NoSolutionCriterion
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::NoSolutionResidue => "NO_SOLUTION_RESIDUE",
            VerdictKind::NoSolutionPDividesD => "NO_SOLUTION_P_DIVIDES_D",
            VerdictKind::NoSolutionCriterion => "NO_SOLUTION_CRITERION",
            VerdictKind::CandidateFamily => "CANDIDATE_FAMILY",
            VerdictKind::HypothesisRefused => "HYPOTHESIS_REFUSED",
        }
    }
}

/// The q^n = +-1 (mod p) test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "camelCase")]
pub enum Criterion {
    /// An earlier branch decided the verdict.
    NotReached,
    Holds {
        residue: u64,
    },
    Fails {
        residue: u64,
    },
    /// n was not given: q^k mod p for k = 1..ord_p(q), and the k in that range
    /// for which the residue is +-1.
    #[serde(rename_all = "camelCase")]
    DependsOnN {
        cycle: Vec<u64>,
        admissible_n: Vec<u32>,
    },
    DependsOnQ,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Verdict {
    pub kind: VerdictKind,
    pub detail: String,
    pub class_number: u64,
    pub criterion: Criterion,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub general: Option<GeneralInfo>,
    pub witnesses: Vec<SolutionWitness>,
}

impl Verdict {
    pub(crate) fn new(kind: VerdictKind, detail: impl Into<String>, h: u64) -> Self {
        Verdict {
            kind,
            detail: detail.into(),
            class_number: h,
            criterion: Criterion::NotReached,
            general: None,
            witnesses: Vec::new(),
        }
    }
}

pub(crate) fn evaluate_criterion(q: Option<u64>, n: Option<u32>, p: u32) -> Criterion {
    let p64 = p as u64;
    let Some(q) = q else {
        return Criterion::DependsOnQ;
    };
    let good = |r: u64| r == 1 || r == p64 - 1;
    match n {
        Some(n) => {
            let residue = pow_mod(q, n as u64, p64);
            if good(residue) {
                Criterion::Holds { residue }
            } else {
                Criterion::Fails { residue }
            }
        }
        None => {
            let ord = multiplicative_order(q, p64);
            let cycle: Vec<u64> = (1..=ord).map(|k| pow_mod(q, k, p64)).collect();
            let admissible_n = cycle.iter().enumerate().filter(|(_, &r)| good(r)).map(|(i, _)| i as u32 + 1).collect();
            Criterion::DependsOnN { cycle, admissible_n }
        }
    }
}

/// Branches that need no class number: p | d or q | d, then d mod 4.
pub(crate) fn elementary_verdict(inst: &EquationInstance, h: u64) -> Option<Verdict> {
    let d = inst.d;
    let p = inst.p as u64;
    if d.is_multiple_of(p) {
        return Some(Verdict::new(
            VerdictKind::NoSolutionPDividesD,
            format!("p = {p} divides d = {d}: the equation forces p | y and then p | x"),
            h,
        ));
    }
    if let Some(q) = inst.q.filter(|q| d.is_multiple_of(*q)) {
        return Some(Verdict::new(
            VerdictKind::NoSolutionPDividesD,
            format!("q = {q} divides d = {d}: the equation forces q | y and then q | x"),
            h,
        ));
    }
    if d % 4 != 3 {
        return Some(Verdict::new(
            VerdictKind::NoSolutionResidue,
            format!("d = {d} is {} mod 4; x must be odd, which forces d = 3 mod 4", d % 4),
            h,
        ));
    }
    None
}

/// Classifies an instance. Instances with N != p are handed to
/// [`classify_general`].
pub fn classify(inst: &EquationInstance) -> Result<Verdict> {
    inst.validate()?;
    if inst.big_n.is_some_and(|big_n| big_n != inst.p) {
        return classify_general(inst);
    }
    let h = class_number(inst.d)?.h;
    if let Some(v) = elementary_verdict(inst, h) {
        return Ok(v);
    }
    let p = inst.p as u64;
    if h % p == 0 {
        return Ok(Verdict::new(
            VerdictKind::HypothesisRefused,
            format!("p = {p} divides h(-{}) = {h}; the classification does not apply", inst.d),
            h,
        ));
    }
    let criterion = evaluate_criterion(inst.q, inst.n, inst.p);
    let (kind, detail) = match &criterion {
        Criterion::Fails { residue } => {
            (VerdictKind::NoSolutionCriterion, format!("q^n = {residue} (mod {p}), not +-1"))
        }
        Criterion::Holds { residue } => (
            VerdictKind::CandidateFamily,
            format!("q^n = {residue} (mod {p}); solutions can only come from the v = p^(m-1) family"),
        ),
        Criterion::DependsOnN { .. } => {
            (VerdictKind::CandidateFamily, "criterion depends on n; see the residue cycle".to_string())
        }
        Criterion::DependsOnQ | Criterion::NotReached => {
            (VerdictKind::CandidateFamily, "criterion depends on q".to_string())
        }
    };
    let mut v = Verdict::new(kind, detail, h);
    v.criterion = criterion;
    Ok(v)
}
