//! Fibonacci and Lucas numbers, their square classifications, and inverse lookup.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use std::sync::{OnceLock, RwLock};

use crate::arith::exact_sqrt;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct FibLucasTable {
    pub fib: Vec<BigUint>,
    pub lucas: Vec<BigUint>,
}

impl FibLucasTable {
    pub fn with_max_index(max: usize) -> Self {
        let mut t = FibLucasTable {
            fib: vec![BigUint::zero(), BigUint::one()],
            lucas: vec![BigUint::from(2u32), BigUint::one()],
        };
        t.extend_to(max);
        t
    }

    pub fn max_index(&self) -> usize {
        self.fib.len() - 1
    }

    fn extend_to(&mut self, max: usize) {
        while self.fib.len() <= max {
            let n = self.fib.len();
            let f = &self.fib[n - 1] + &self.fib[n - 2];
            let l = &self.lucas[n - 1] + &self.lucas[n - 2];
            self.fib.push(f);
            self.lucas.push(l);
        }
    }
}

fn shared() -> &'static RwLock<FibLucasTable> {
    static TABLE: OnceLock<RwLock<FibLucasTable>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(FibLucasTable::with_max_index(64)))
}

fn with_table<R>(max: usize, f: impl FnOnce(&FibLucasTable) -> R) -> R {
    {
        let t = shared().read().unwrap();
        if t.max_index() >= max {
            return f(&t);
        }
    }
    let mut t = shared().write().unwrap();
    t.extend_to(max);
    f(&t)
}

/// (F_k, L_k).
pub fn fib_lucas(k: usize) -> (BigUint, BigUint) {
    with_table(k, |t| (t.fib[k].clone(), t.lucas[k].clone()))
}

/// F_k and L_k for any integer index, via F_{-n} = (-1)^{n+1} F_n and
/// L_{-n} = (-1)^n L_n.
pub fn fib_lucas_signed(k: i64) -> (BigInt, BigInt) {
    let (f, l) = fib_lucas(k.unsigned_abs() as usize);
    let (f, l) = (BigInt::from(f), BigInt::from(l));
    if k >= 0 {
        return (f, l);
    }
    let odd = k.unsigned_abs() % 2 == 1;
    if odd {
        (f, -l)
    } else {
        (-f, l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sequence {
    Fib,
    Lucas,
    /// F_k / 5, when 5 divides F_k.
    Fib5,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SquareClass {
    pub which: Sequence,
    pub k: usize,
    #[serde(with = "crate::serde_dec")]
    pub value: BigUint,
    #[serde(with = "crate::serde_dec::option")]
    pub root: Option<BigUint>,
}

impl SquareClass {
    pub fn is_square(&self) -> bool {
        self.root.is_some()
    }
}

/// Is F_k (resp. L_k, resp. F_k / 5) a perfect square?
pub fn classify_square(which: Sequence, k: usize) -> SquareClass {
    let (f, l) = fib_lucas(k);
    let (value, root) = match which {
        Sequence::Fib => {
            let r = exact_sqrt(&f);
            (f, r)
        }
        Sequence::Lucas => {
            let r = exact_sqrt(&l);
            (l, r)
        }
        Sequence::Fib5 => {
            let (q, rem) = f.div_rem(&BigUint::from(5u32));
            let r = if rem.is_zero() && !q.is_zero() { exact_sqrt(&q) } else { None };
            (f, r)
        }
    };
    SquareClass { which, k, value, root }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IdentityReport {
    pub k: usize,
    pub eps: i8,
    /// 4 F_k - F_{k-2e}
    #[serde(with = "crate::serde_dec")]
    pub fib_lhs: BigInt,
    /// L_{k+e}
    #[serde(with = "crate::serde_dec")]
    pub fib_rhs: BigInt,
    /// 4 L_k - L_{k-2e}
    #[serde(with = "crate::serde_dec")]
    pub lucas_lhs: BigInt,
    /// 5 F_{k+e}
    #[serde(with = "crate::serde_dec")]
    pub lucas_rhs: BigInt,
}

impl IdentityReport {
    pub fn pass(&self) -> bool {
        self.fib_lhs == self.fib_rhs && self.lucas_lhs == self.lucas_rhs
    }
}

/// Checks 4F_k - F_{k-2e} = L_{k+e} and 4L_k - L_{k-2e} = 5F_{k+e}.
pub fn identity_audit(k: usize, eps: i8) -> Result<IdentityReport> {
    if eps != 1 && eps != -1 {
        return Err(Error::IndexOutOfRange(format!("epsilon must be +-1, got {eps}")));
    }
    let k_i = k as i64;
    let shifted = k_i - 2 * eps as i64;
    if shifted < 0 {
        return Err(Error::IndexOutOfRange(format!("k - 2e = {shifted} is negative")));
    }
    let (fk, lk) = fib_lucas(k);
    let (fs, ls) = fib_lucas(shifted as usize);
    let (fe, le) = fib_lucas((k_i + eps as i64) as usize);
    let four = BigInt::from(4);
    Ok(IdentityReport {
        k,
        eps,
        fib_lhs: &four * BigInt::from(fk) - BigInt::from(fs),
        fib_rhs: BigInt::from(le),
        lucas_lhs: &four * BigInt::from(lk) - BigInt::from(ls),
        lucas_rhs: BigInt::from(5) * BigInt::from(fe),
    })
}

/// Every k >= 0 with F_k = value (resp. L_k = value), ascending.
pub fn inverse_lookup(value: &BigUint, which: Sequence) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let (f, l) = fib_lucas(k);
        let term = match which {
            Sequence::Lucas => l,
            _ => f,
        };
        if &term == value {
            out.push(k);
        }
        // both sequences are non-decreasing from index 2 on
        if k >= 2 && &term > value {
            break;
        }
        k += 1;
    }
    out
}
