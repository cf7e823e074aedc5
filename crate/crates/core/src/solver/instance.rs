use serde::Serialize;

use crate::arith::{is_prime_u64, is_squarefree};
use crate::error::{Error, Result};

/// One equation d x^2 + p^(2m) q^(2n) = 4 y^E with E = N when given, else p.
///
/// m, n and q may be left open; operations that need them say so.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquationInstance {
    pub d: u64,
    pub p: u32,
    pub q: Option<u64>,
    pub m: Option<u32>,
    pub n: Option<u32>,
    #[serde(rename = "N")]
    pub big_n: Option<u32>,
}

impl EquationInstance {
    pub fn new(d: u64, p: u32, q: u64) -> Result<Self> {
        let inst = EquationInstance { d, p, q: Some(q), m: None, n: None, big_n: None };
        inst.validate()?;
        Ok(inst)
    }

    /// Instance with q left open (exponent-N searches discover it).
    pub fn without_q(d: u64, p: u32) -> Result<Self> {
        let inst = EquationInstance { d, p, q: None, m: None, n: None, big_n: None };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_m(mut self, m: u32) -> Result<Self> {
        self.m = Some(m);
        self.validate()?;
        Ok(self)
    }

    pub fn with_n(mut self, n: u32) -> Result<Self> {
        self.n = Some(n);
        self.validate()?;
        Ok(self)
    }

    pub fn with_exponent(mut self, big_n: u32) -> Result<Self> {
        self.big_n = Some(big_n);
        self.validate()?;
        Ok(self)
    }

    /// The exponent of y.
    pub fn exponent(&self) -> u32 {
        self.big_n.unwrap_or(self.p)
    }

    /// N / p.
    pub fn cofactor(&self) -> u32 {
        self.exponent() / self.p
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::ZeroD);
        }
        if !is_squarefree(self.d) {
            return Err(Error::NotSquarefree(self.d));
        }
        if self.p < 3 || !is_prime_u64(self.p as u64) {
            return Err(Error::NotOddPrime { name: "p", value: self.p as u64 });
        }
        if let Some(q) = self.q {
            if q < 3 || !is_prime_u64(q) {
                return Err(Error::NotOddPrime { name: "q", value: q });
            }
            if q == self.p as u64 {
                return Err(Error::EqualPrimes(q));
            }
        }
        if self.m == Some(0) || self.n == Some(0) {
            return Err(Error::InvalidInstance("m and n must be positive".into()));
        }
        if let Some(big_n) = self.big_n {
            if big_n % 2 == 0 {
                return Err(Error::InvalidInstance(format!("N = {big_n} must be odd")));
            }
            if big_n % self.p != 0 {
                return Err(Error::InvalidInstance(format!("p = {} does not divide N = {big_n}", self.p)));
            }
        }
        Ok(())
    }

    pub(crate) fn require_q(&self) -> Result<u64> {
        self.q.ok_or_else(|| Error::InvalidInstance("q is required for this operation".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(EquationInstance::new(7, 3, 43).is_ok());
        assert_eq!(EquationInstance::new(12, 3, 5), Err(Error::NotSquarefree(12)));
        assert_eq!(EquationInstance::new(0, 3, 5), Err(Error::ZeroD));
        assert_eq!(EquationInstance::new(7, 3, 3), Err(Error::EqualPrimes(3)));
        assert!(EquationInstance::new(7, 2, 5).is_err());
        assert!(EquationInstance::new(7, 9, 5).is_err());
        assert!(EquationInstance::new(7, 3, 15).is_err());
        let base = EquationInstance::without_q(7, 5).unwrap();
        assert!(base.clone().with_exponent(15).is_ok());
        assert!(base.clone().with_exponent(10).is_err());
        assert!(base.clone().with_exponent(21).is_err());
        assert!(base.with_m(0).is_err());
    }

    #[test]
    fn exponent() {
        let i = EquationInstance::without_q(7, 5).unwrap();
        assert_eq!(i.exponent(), 5);
        let i = i.with_exponent(15).unwrap();
        assert_eq!((i.exponent(), i.cofactor()), (15, 3));
    }
}
