//! Class numbers of imaginary quadratic fields by reduced-form enumeration.

use num_integer::Integer;
use serde::Serialize;

use crate::arith::is_squarefree;
use crate::error::{Error, Result};

/// Square-free d whose class numbers h(-d) are all powers of two no larger than 32.
pub const POWER_OF_TWO_SET: [u64; 93] = [
    7, 11, 15, 19, 35, 39, 43, 51, 55, 67, 91, 95, 111, 115, 123, 155, 163, 183, 187, 195, 203, 219, 235, 259, 267,
    295, 299, 323, 355, 371, 395, 399, 403, 407, 427, 435, 471, 483, 555, 559, 579, 583, 595, 627, 651, 663, 667, 715,
    723, 763, 791, 795, 799, 895, 903, 915, 939, 943, 955, 979, 987, 995, 1003, 1015, 1023, 1027, 1043, 1047, 1119,
    1131, 1139, 1155, 1159, 1195, 1227, 1239, 1243, 1299, 1339, 1379, 1387, 1411, 1435, 1443, 1463, 1507, 1551, 1555,
    1595, 1635, 1651, 1659, 1731,
];

/// Class numbers allowed for members of [`POWER_OF_TWO_SET`].
pub const POWER_OF_TWO_CLASS_NUMBERS: [u64; 6] = [1, 2, 4, 8, 16, 32];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassData {
    pub d: u64,
    pub discriminant: i64,
    pub h: u64,
    pub forms_count: u64,
}

/// A reduced primitive positive definite form A x^2 + B xy + C y^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReducedForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

fn check_d(d: u64) -> Result<()> {
    if d == 0 {
        return Err(Error::ZeroD);
    }
    if !is_squarefree(d) {
        return Err(Error::NotSquarefree(d));
    }
    Ok(())
}

/// Field discriminant of Q(sqrt(-d)).
pub fn discriminant_of(d: u64) -> Result<i64> {
    check_d(d)?;
    let d = i64::try_from(d).map_err(|_| Error::InvalidInstance(format!("d = {d} too large")))?;
    Ok(if d % 4 == 3 { -d } else { -4 * d })
}

/// All reduced primitive forms of a negative discriminant.
///
/// Reduction forces |B| <= A <= C, so 4A^2 <= 4AC = B^2 - disc <= A^2 + |disc|, i.e.
/// 3A^2 <= |disc|. The outer loop runs A over exactly that range.
pub fn reduced_forms(disc: i64) -> Vec<ReducedForm> {
    assert!(disc < 0 && disc.rem_euclid(4) <= 1, "not a negative discriminant: {disc}");
    let abs = disc.unsigned_abs() as i64;
    let mut forms = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= abs {
        for b in (-a + 1)..=a {
            let num = b * b - disc;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (a == c && b < 0) {
                continue;
            }
            if a.gcd(&b).gcd(&c) != 1 {
                continue;
            }
            forms.push(ReducedForm { a, b, c });
        }
        a += 1;
    }
    forms
}

pub fn class_number(d: u64) -> Result<ClassData> {
    let discriminant = discriminant_of(d)?;
    let count = reduced_forms(discriminant).len() as u64;
    Ok(ClassData { d, discriminant, h: count, forms_count: count })
}

/// True iff p does not divide h(-d).
pub fn hypothesis_gate(d: u64, p: u64) -> Result<bool> {
    if p < 3 || !crate::arith::is_prime_u64(p) {
        return Err(Error::NotOddPrime { name: "p", value: p });
    }
    Ok(class_number(d)?.h % p != 0)
}

pub fn in_power_of_two_set(d: u64) -> bool {
    POWER_OF_TWO_SET.binary_search(&d).is_ok()
}
