//! Exact solver and verifier for d x^2 + p^(2m) q^(2n) = 4 y^p and its exponent-N
//! generalization.
//!
//! * [`class_number`]: h(-d) by reduced forms, and the p-does-not-divide-h gate.
//! * [`sums`]: the binomial sums R and I and the power expansion they describe.
//! * [`lehmer`]: Lehmer pairs, numbers, primitive divisors, exceptional pairs.
//! * [`fib`]: Fibonacci/Lucas tables and square classification.
//! * [`solver`]: classification, family enumeration, brute-force oracle, corollaries.

pub mod arith;
pub mod class_number;
pub mod error;
pub mod factor;
pub mod fib;
pub mod lehmer;
pub mod serde_dec;
pub mod solver;
pub mod sums;

pub use class_number::{class_number, discriminant_of, hypothesis_gate, ClassData};
pub use error::{Error, Result};
pub use lehmer::{LehmerPair, PrimitiveDivisorReport};
pub use solver::{EquationInstance, SolutionWitness, Verdict, VerdictKind};
pub use sums::SumInput;
