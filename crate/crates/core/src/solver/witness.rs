use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::lehmer::{lehmer_number, pair_from_uv};

/// A solution (x, y) together with the data it was generated from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SolutionWitness {
    #[serde(with = "crate::serde_dec")]
    pub x: BigUint,
    #[serde(with = "crate::serde_dec")]
    pub y: BigUint,
    #[serde(with = "crate::serde_dec::option")]
    pub u: Option<BigUint>,
    #[serde(with = "crate::serde_dec::option")]
    pub v: Option<BigUint>,
    pub m: u32,
    pub n: u32,
    #[serde(with = "crate::serde_dec")]
    pub q: BigUint,
    /// Exponent of y (p, or N for the generalized equation).
    pub exponent: u32,
    #[serde(with = "crate::serde_dec::option")]
    pub u_prime: Option<BigUint>,
    pub t: Option<u32>,
    pub delta: Option<u8>,
    pub checks: WitnessChecks,
    pub verified: bool,
}

/// Individual invariant checks; `None` when the witness lacks the (u, v) data a
/// check needs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct WitnessChecks {
    /// d x^2 + p^(2m) q^(2n) = 4 y^E
    pub substitution: bool,
    pub coprime_xy: bool,
    pub x_odd: bool,
    /// gcd(u d, v) = 1
    pub coprime_ud_v: Option<bool>,
    /// 4 y^(E/p) = u^2 d + v^2
    pub norm_relation: Option<bool>,
    /// x = +-u (mod p)
    pub x_pm_u: Option<bool>,
    /// |l_p| v = p^m q^n for the pair (u^2 d, -v^2)
    pub lehmer_identity: Option<bool>,
    pub m_at_least_2: bool,
}

impl WitnessChecks {
    /// Every check that could be evaluated passed.
    pub fn all_pass(&self) -> bool {
        self.substitution
            && self.coprime_xy
            && self.x_odd
            && self.m_at_least_2
            && [self.coprime_ud_v, self.norm_relation, self.x_pm_u, self.lehmer_identity]
                .iter()
                .all(|c| c.unwrap_or(true))
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn equation_holds(d: u64, p: u32, x: &BigUint, y: &BigUint, m: u32, n: u32, q: &BigUint, e: u32) -> bool {
    let lhs = BigUint::from(d) * x * x + BigUint::from(p).pow(2 * m) * q.pow(2 * n);
    lhs == BigUint::from(4u32) * y.pow(e)
}

/// Recomputes every invariant of `w` against the equation with parameters d, p.
pub fn audit_witness(d: u64, p: u32, w: &SolutionWitness) -> WitnessChecks {
    let mut c = WitnessChecks {
        substitution: equation_holds(d, p, &w.x, &w.y, w.m, w.n, &w.q, w.exponent),
        coprime_xy: w.x.gcd(&w.y).is_one(),
        x_odd: w.x.is_odd(),
        m_at_least_2: w.m >= 2,
        ..Default::default()
    };
    let (Some(u), Some(v)) = (&w.u, &w.v) else {
        return c;
    };
    let pb = BigUint::from(p);
    c.coprime_ud_v = Some((u * d).gcd(v).is_one());
    let big_y = w.y.pow(w.exponent / p);
    c.norm_relation = Some(&big_y * 4u32 == u * u * d + v * v);
    let (xr, ur) = (&w.x % &pb, u % &pb);
    c.x_pm_u = Some(!ur.is_zero() && (xr == ur || (&xr + &ur) % &pb == BigUint::zero()));
    c.lehmer_identity = Some(match pair_from_uv(d, u, v) {
        Ok(pair) => match lehmer_number(&pair, p as usize) {
            Ok(l) => BigInt::from(l.magnitude() * v) == BigInt::from(pb.pow(w.m) * w.q.pow(w.n)),
            Err(_) => false,
        },
        Err(_) => false,
    });
    c
}

impl SolutionWitness {
    /// Builds a witness and fills in `checks` / `verified` from scratch.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        d: u64,
        p: u32,
        x: BigUint,
        y: BigUint,
        uv: Option<(BigUint, BigUint)>,
        m: u32,
        n: u32,
        q: BigUint,
        exponent: u32,
    ) -> Self {
        let (u, v) = match uv {
            Some((u, v)) => (Some(u), Some(v)),
            None => (None, None),
        };
        let mut w = SolutionWitness {
            x,
            y,
            u,
            v,
            m,
            n,
            q,
            exponent,
            u_prime: None,
            t: None,
            delta: None,
            checks: WitnessChecks::default(),
            verified: false,
        };
        w.recheck(d, p);
        w
    }

    pub(crate) fn recheck(&mut self, d: u64, p: u32) {
        self.checks = audit_witness(d, p, self);
        self.verified = self.checks.substitution && self.checks.coprime_xy;
    }

    /// Canonical ordering key: (m, n, y, x).
    pub(crate) fn sort_key(&self) -> (u32, u32, BigUint, BigUint) {
        (self.m, self.n, self.y.clone(), self.x.clone())
    }
}
