//! Classification and solution search for d x^2 + p^(2m) q^(2n) = 4 y^p
//! (or 4 y^N with p | N).
//!
//! Every witness that leaves this module has been substituted back into the
//! equation; constructors never set `verified` on trust.

mod brute;
mod classify;
mod consistency;
mod corollary;
mod family;
mod general;
mod instance;
mod shard;
mod witness;

pub use brute::{brute_force_search, SearchBounds};
pub use classify::{classify, Criterion, Verdict, VerdictKind};
pub use consistency::{consistency_check, ConsistencyBounds, ConsistencyReport, ConsistencyStatus, Falsification};
pub use corollary::{corollary_suite, Corollary, CorollaryRanges, CorollaryReport, CorollaryRow, SuiteStatus};
pub use family::{enumerate_family, FamilyBounds};
pub use general::{classify_general, enumerate_general, u_prime_bound, GeneralInfo};
pub use instance::EquationInstance;
pub use witness::{audit_witness, SolutionWitness, WitnessChecks};
