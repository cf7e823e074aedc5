//! The three explicit no-solution families.
//!
//! 1. q = p + 2 and n = p with p >= 5 and p + 2 both prime: q^n = 2 (mod p).
//! 2. q = d + p and n = p with p > 41 prime, d in {2, 3, 7, 11, 19, 43, 67, 163}
//!    and d + p prime: q^n = d (mod p).
//! 3. q = 3 and n = p, d in the power-of-two class number set, p >= 5: q^n = 3 (mod p).
//!
//! Every member must be classified as a NO_SOLUTION verdict.

use serde::Serialize;

use super::brute::{brute_force_search, SearchBounds};
use super::classify::{classify, VerdictKind};
use super::instance::EquationInstance;
use crate::arith::{is_prime_u64, is_squarefree, pow_mod};
use crate::class_number::{class_number, POWER_OF_TWO_SET};
use crate::error::{Error, Result};

/// The d values of the second family.
pub const SECOND_FAMILY_D: [u64; 8] = [2, 3, 7, 11, 19, 43, 67, 163];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Corollary {
    TwinPrime = 1,
    ShiftedPrime = 2,
    PowerOfThree = 3,
}

impl Corollary {
    pub fn from_index(i: u32) -> Result<Self> {
        match i {
            1 => Ok(Corollary::TwinPrime),
            2 => Ok(Corollary::ShiftedPrime),
            3 => Ok(Corollary::PowerOfThree),
            _ => Err(Error::InvalidInstance(format!("no corollary {i}; expected 1, 2 or 3"))),
        }
    }

    pub fn index(self) -> u32 {
        self as u32
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorollaryRanges {
    /// Largest p tried (families 1 and 2).
    pub p_max: u32,
    /// Largest d tried (family 1).
    pub d_max: u64,
    /// The primes p of family 3.
    pub primes: Vec<u32>,
    /// Confirm each member by a brute-force scan with these bounds.
    pub confirm: Option<SearchBounds>,
}

impl Default for CorollaryRanges {
    fn default() -> Self {
        CorollaryRanges { p_max: 100, d_max: 200, primes: vec![5, 7, 11, 13], confirm: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorollaryRow {
    pub d: u64,
    pub p: u32,
    pub q: u64,
    pub n: u32,
    pub class_number: u64,
    /// q^n mod p
    pub residue: u64,
    /// The residue the family predicts.
    pub expected_residue: u64,
    pub verdict: VerdictKind,
    pub brute_empty: Option<bool>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SuiteStatus {
    Passed,
    /// No member in range; nothing was tested.
    Vacuous,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorollaryReport {
    pub corollary: u32,
    pub status: SuiteStatus,
    pub rows: Vec<CorollaryRow>,
    /// (d, p) pairs left out because p divides h(-d).
    pub gated: Vec<(u64, u32)>,
    /// Sub-families with no member in range (family 2: one per d).
    pub vacuous: Vec<String>,
}

fn odd_primes(lo: u32, hi: u32) -> Vec<u32> {
    (lo.max(3)..=hi).filter(|&p| is_prime_u64(p as u64)).collect()
}

fn check_member(d: u64, p: u32, q: u64, expected: u64, ranges: &CorollaryRanges) -> Result<Option<CorollaryRow>> {
    let h = class_number(d)?.h;
    if h % p as u64 == 0 {
        return Ok(None);
    }
    let inst = EquationInstance::new(d, p, q)?.with_n(p)?;
    let verdict = classify(&inst)?;
    let residue = pow_mod(q, p as u64, p as u64);
    let brute_empty = match &ranges.confirm {
        Some(b) => Some(brute_force_search(&inst, b, 1)?.is_empty()),
        None => None,
    };
    let pass = residue == expected % p as u64 && verdict.kind.is_no_solution() && brute_empty != Some(false);
    Ok(Some(CorollaryRow {
        d,
        p,
        q,
        n: p,
        class_number: h,
        residue,
        expected_residue: expected % p as u64,
        verdict: verdict.kind,
        brute_empty,
        pass,
    }))
}

/// Runs one corollary over `ranges`.
pub fn corollary_suite(which: Corollary, ranges: &CorollaryRanges) -> Result<CorollaryReport> {
    let mut report = CorollaryReport {
        corollary: which.index(),
        status: SuiteStatus::Vacuous,
        rows: Vec::new(),
        gated: Vec::new(),
        vacuous: Vec::new(),
    };
    let push = |report: &mut CorollaryReport, d: u64, p: u32, q: u64, expected: u64| -> Result<()> {
        match check_member(d, p, q, expected, ranges)? {
            Some(row) => report.rows.push(row),
            None => report.gated.push((d, p)),
        }
        Ok(())
    };
    match which {
        Corollary::TwinPrime => {
            for p in odd_primes(5, ranges.p_max) {
                if !is_prime_u64(p as u64 + 2) {
                    continue;
                }
                for d in (1..=ranges.d_max).filter(|&d| is_squarefree(d)) {
                    push(&mut report, d, p, p as u64 + 2, 2)?;
                }
            }
        }
        Corollary::ShiftedPrime => {
            for d in SECOND_FAMILY_D {
                let before = report.rows.len() + report.gated.len();
                for p in odd_primes(42, ranges.p_max) {
                    if is_prime_u64(d + p as u64) {
                        push(&mut report, d, p, d + p as u64, d)?;
                    }
                }
                if report.rows.len() + report.gated.len() == before {
                    let why = if d % 2 == 1 { "d + p is even for every odd p" } else { "no p in range" };
                    report.vacuous.push(format!("d = {d}: {why}"));
                }
            }
        }
        Corollary::PowerOfThree => {
            for &p in &ranges.primes {
                if p < 5 || !is_prime_u64(p as u64) {
                    return Err(Error::NotOddPrime { name: "p", value: p as u64 });
                }
                for d in POWER_OF_TWO_SET {
                    push(&mut report, d, p, 3, 3)?;
                }
            }
        }
    }
    report.status = if report.rows.iter().any(|r| !r.pass) {
        SuiteStatus::Failed
    } else if report.rows.is_empty() {
        SuiteStatus::Vacuous
    } else {
        SuiteStatus::Passed
    };
    Ok(report)
}
