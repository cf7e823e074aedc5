use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use super::instance::EquationInstance;
use super::shard::{chunks, run_cells};
use super::witness::SolutionWitness;
use crate::arith::exact_sqrt;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchBounds {
    pub y_max: u64,
    pub m_max: u32,
    pub n_max: u32,
}

const Y_CHUNK: u64 = 256;

/// Solves 4 y^(E/p) = u^2 d + p^(2(m-1)) for odd u, if possible.
fn back_solve(d: u64, p: u32, y_pow: &BigUint, m: u32) -> Option<(BigUint, BigUint)> {
    let v = BigUint::from(p).pow(m - 1);
    let four_y = y_pow * 4u32;
    let v2 = &v * &v;
    if four_y <= v2 {
        return None;
    }
    let (quot, rem) = (four_y - v2).div_rem(&BigUint::from(d));
    if !rem.is_zero() {
        return None;
    }
    let u = exact_sqrt(&quot)?;
    u.is_odd().then_some((u, v))
}

/// Exhaustive scan of 1 <= y <= y_max over every (m, n) in range (or the
/// instance's fixed m, n). Needs q. Makes no use of the classification, so it
/// serves as an independent oracle.
///
/// Witnesses carry (u, v) when 4 y^(E/p) = u^2 d + p^(2(m-1)) has an odd
/// solution u, and leave them empty otherwise.
pub fn brute_force_search(
    inst: &EquationInstance,
    bounds: &SearchBounds,
    workers: usize,
) -> Result<Vec<SolutionWitness>> {
    inst.validate()?;
    let q = inst.require_q()?;
    let (d, p, e) = (inst.d, inst.p, inst.exponent());
    let t = inst.cofactor();
    let ms: Vec<u32> = inst.m.map_or_else(|| (1..=bounds.m_max).collect(), |m| vec![m]);
    let ns: Vec<u32> = inst.n.map_or_else(|| (1..=bounds.n_max).collect(), |n| vec![n]);
    let mut constants = Vec::new();
    for &m in &ms {
        for &n in &ns {
            let c = BigUint::from(p).pow(2 * m) * BigUint::from(q).pow(2 * n);
            constants.push((m, n, c));
        }
    }
    let cells = chunks(1, bounds.y_max, Y_CHUNK);
    let q_big = BigUint::from(q);
    let d_big = BigUint::from(d);
    let mut found = run_cells(&cells, workers, |&(lo, hi)| {
        let mut out = Vec::new();
        for y in lo..=hi {
            let y_big = BigUint::from(y);
            let y_pow_t = y_big.pow(t);
            let rhs_full = y_pow_t.pow(p) * 4u32;
            for (m, n, c) in &constants {
                if rhs_full <= *c {
                    continue;
                }
                let (x2, rem) = (&rhs_full - c).div_rem(&d_big);
                if !rem.is_zero() {
                    continue;
                }
                let Some(x) = exact_sqrt(&x2) else { continue };
                if x.is_zero() || !x.gcd(&y_big).is_one() {
                    continue;
                }
                let uv = back_solve(d, p, &y_pow_t, *m);
                out.push(SolutionWitness::assemble(d, p, x, y_big.clone(), uv, *m, *n, q_big.clone(), e));
            }
        }
        out
    });
    found.sort_by_key(SolutionWitness::sort_key);
    Ok(found)
}
