//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use nagell_core::arith::{is_prime_u64, is_squarefree, pow_mod};
use nagell_core::class_number::{POWER_OF_TWO_CLASS_NUMBERS, POWER_OF_TWO_SET};
use nagell_core::fib::identity_audit;
use nagell_core::lehmer::{closed_form_odd, has_primitive_divisor, lehmer_number};
use nagell_core::solver::{
    brute_force_search, classify, enumerate_family, Corollary, CorollaryRanges, FamilyBounds, SearchBounds, SuiteStatus,
};
use nagell_core::sums::congruence_audit;
use nagell_core::{class_number, EquationInstance, LehmerPair, SolutionWitness, SumInput, VerdictKind};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome, Option<Duration>);

const ODD_PRIMES_TO_30: [u32; 9] = [3, 5, 7, 11, 13, 17, 19, 23, 29];

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn nagell(args: &str) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_nagell")).args(args.split_whitespace()).output().expect("binary runs");
    let code = out.status.code().unwrap_or(-1);
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, json)
}

fn pairs(v: &Value) -> Vec<(String, String, u64)> {
    v["witnesses"]
        .as_array()
        .map(|ws| {
            ws.iter()
                .map(|w| {
                    (
                        w["x"].as_str().unwrap_or("").to_string(),
                        w["y"].as_str().unwrap_or("").to_string(),
                        w["m"].as_u64().unwrap_or(0),
                    )
                })
                .collect()
        })
        .unwrap_or_default()
}

fn squarefree_with(rng: &mut ChaCha8Rng, max: u64, keep: impl Fn(u64) -> bool) -> u64 {
    loop {
        let d = rng.gen_range(1..=max);
        if is_squarefree(d) && keep(d) {
            return d;
        }
    }
}

fn random_pair(rng: &mut ChaCha8Rng, limit: i64) -> LehmerPair {
    loop {
        let a = rng.gen_range(-limit..=limit);
        let m = rng.gen_range(-limit..=limit);
        if let Ok(pair) = LehmerPair::from_i64(a, a - 4 * m) {
            return pair;
        }
    }
}

fn worked_witness() -> Outcome {
    let lhs =
        BigUint::from(7u32) * BigUint::from(185u32).pow(2) + BigUint::from(3u32).pow(4) * BigUint::from(43u32).pow(2);
    ensure!(lhs == BigUint::from(4u32) * BigUint::from(46u32).pow(3), "7*185^2 + 3^4*43^2 != 4*46^3");
    let want = vec![("185".to_string(), "46".to_string(), 2)];
    let (code, solve) = nagell("solve --d 7 --p 3 --q 43 --n 1 --u-max 9 --m-max 3");
    ensure!(code == 0, "solve exited {code}");
    ensure!(pairs(&solve) == want, "solve returned {:?}", pairs(&solve));
    ensure!(solve["witnesses"][0]["u"] == "5", "solve witness u = {}", solve["witnesses"][0]["u"]);
    let (code, search) = nagell("search --d 7 --p 3 --q 43 --n 1 --y-max 100");
    ensure!(code == 0, "search exited {code}");
    ensure!(pairs(&search) == want, "search returned {:?}", pairs(&search));
    for w in solve["witnesses"].as_array().into_iter().chain(search["witnesses"].as_array()).flatten() {
        ensure!(w["checks"]["substitution"] == true && w["verified"] == true, "witness not re-verified: {w}");
    }
    Ok("solve and search both give exactly (185, 46) with m = 2, u = 5".into())
}

fn general_witness() -> Outcome {
    let lhs =
        BigUint::from(7u32) * BigUint::from(89u32).pow(2) + BigUint::from(5u32).pow(4) * BigUint::from(11u32).pow(2);
    ensure!(lhs == BigUint::from(4u32) * BigUint::from(2u32).pow(15), "7*89^2 + 5^4*11^2 != 4*2^15");
    let (code, v) = nagell("general --d 7 --p 5 --N 15 --m 2");
    ensure!(code == 0, "general exited {code}");
    let ws = v["witnesses"].as_array().cloned().unwrap_or_default();
    ensure!(ws.len() == 1, "expected one witness, got {}", ws.len());
    let w = &ws[0];
    for (key, want) in [("uPrime", "1"), ("x", "89"), ("y", "2"), ("q", "11")] {
        ensure!(w[key] == want, "{key} = {}, expected {want}", w[key]);
    }
    ensure!(w["n"] == 1 && w["exponent"] == 15 && w["verified"] == true, "witness {w}");
    Ok("u' = 1 gives (89, 2) with q = 11, n = 1".into())
}

/// Analytic class number formula, independent of the reduced-form count.
fn dirichlet_h(d: u64) -> u64 {
    fn kronecker(disc: i64, mut r: i64) -> i64 {
        let mut out = 1;
        while r % 2 == 0 {
            r /= 2;
            out *= match disc.rem_euclid(8) {
                1 | 7 => 1,
                3 | 5 => -1,
                _ => 0,
            };
        }
        let (mut a, mut n, mut sign) = (disc.rem_euclid(r), r, 1);
        while a != 0 {
            while a % 2 == 0 {
                a /= 2;
                if n % 8 == 3 || n % 8 == 5 {
                    sign = -sign;
                }
            }
            std::mem::swap(&mut a, &mut n);
            if a % 4 == 3 && n % 4 == 3 {
                sign = -sign;
            }
            a %= n;
        }
        out * if n == 1 { sign } else { 0 }
    }
    let disc = if d % 4 == 3 { -(d as i64) } else { -4 * d as i64 };
    let w = match disc {
        -3 => 6,
        -4 => 4,
        _ => 2,
    };
    let s: i64 = (1..-disc).map(|r| kronecker(disc, r) * r).sum();
    (-w * s / (-2 * disc)) as u64
}

fn class_numbers() -> Outcome {
    let (code, v) = nagell("classnum --set A");
    ensure!(code == 0, "classnum exited {code}");
    let rows = v["result"].as_array().cloned().unwrap_or_default();
    ensure!(rows.len() == POWER_OF_TWO_SET.len(), "{} rows", rows.len());
    for row in &rows {
        let h = row["h"].as_u64().unwrap_or(0);
        ensure!(POWER_OF_TWO_CLASS_NUMBERS.contains(&h), "h(-{}) = {h}", row["d"]);
    }
    for d in POWER_OF_TWO_SET {
        ensure!(class_number(d).map(|c| c.h).ok() == Some(dirichlet_h(d)), "forms and formula disagree at d = {d}");
    }
    for (d, h) in [(7, 1), (15, 2), (23, 3)] {
        ensure!(dirichlet_h(d) == h && class_number(d).map(|c| c.h).ok() == Some(h), "h(-{d}) != {h}");
    }
    Ok(format!("{} listed d all have h in {{1,2,4,8,16,32}}; h(-7)=1, h(-15)=2, h(-23)=3", rows.len()))
}

fn residue_classes_empty() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let bounds = SearchBounds { y_max: 300, m_max: 3, n_max: 3 };
    for _ in 0..200 {
        let d = squarefree_with(&mut rng, 500, |d| d % 4 == 1 || d % 4 == 2);
        let p = ODD_PRIMES_TO_30[rng.gen_range(0..9)];
        let q = loop {
            let q = ODD_PRIMES_TO_30[rng.gen_range(0..9)];
            if q != p {
                break q as u64;
            }
        };
        let inst = EquationInstance::new(d, p, q).map_err(|e| e.to_string())?;
        let found = brute_force_search(&inst, &bounds, 4).map_err(|e| e.to_string())?;
        ensure!(found.is_empty(), "(d, p, q) = ({d}, {p}, {q}) has {:?}", found[0]);
    }
    Ok("200 instances with d = 1, 2 (mod 4): no solutions for y <= 300, m, n <= 3".into())
}

fn criterion_necessity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bounds = SearchBounds { y_max: 1000, m_max: 3, n_max: 3 };
    let mut done = 0;
    while done < 100 {
        let d = squarefree_with(&mut rng, 500, |d| d % 4 == 3);
        let p = ODD_PRIMES_TO_30[rng.gen_range(1..9)];
        let q = ODD_PRIMES_TO_30[rng.gen_range(0..9)] as u64;
        let n = rng.gen_range(1..=3u32);
        let h = class_number(d).map_err(|e| e.to_string())?.h;
        let r = pow_mod(q, n as u64, p as u64);
        if q == p as u64 || h % p as u64 == 0 || r == 1 || r == p as u64 - 1 {
            continue;
        }
        let inst = EquationInstance::new(d, p, q).and_then(|i| i.with_n(n)).map_err(|e| e.to_string())?;
        let verdict = classify(&inst).map_err(|e| e.to_string())?;
        ensure!(verdict.kind.is_no_solution(), "({d}, {p}, {q}, n={n}) classified {:?}", verdict.kind);
        let found = brute_force_search(&inst, &bounds, 4).map_err(|e| e.to_string())?;
        ensure!(found.is_empty(), "({d}, {p}, {q}, n={n}) has {:?}", found[0]);
        done += 1;
    }
    Ok("100 instances with q^n != +-1 (mod p): no solutions for y <= 1000, m <= 3".into())
}

fn gate_fixture() -> Outcome {
    let (code, v) = nagell("search --d 23 --p 3 --q 5 --y-max 50");
    ensure!(code == 0, "search exited {code}");
    ensure!(pairs(&v).iter().any(|(x, y, _)| x == "1" && y == "8"), "search returned {:?}", pairs(&v));
    let (code, v) = nagell("classify --d 23 --p 3 --q 5");
    ensure!(code == 2, "classify exited {code}, expected 2");
    ensure!(v["verdict"]["kind"] == "HYPOTHESIS_REFUSED", "verdict {}", v["verdict"]["kind"]);
    ensure!(v["verdict"]["classNumber"] == 3, "h(-23) reported as {}", v["verdict"]["classNumber"]);
    Ok("search finds (1, 8) and classify refuses with h(-23) = 3, exit 2".into())
}

fn congruence_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let d = squarefree_with(&mut rng, 1000, |_| true);
        let (u, v) = (rng.gen_range(1..=500u64), rng.gen_range(1..=500u64));
        let k = [1, 3, 5, 7, 11, 13][rng.gen_range(0..6)];
        let report =
            congruence_audit(&SumInput::new(d, u, v, k).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure!(report.all_pass(), "(d, u, v, k) = ({d}, {u}, {v}, {k}): {report:?}");
    }
    let (code, v) = nagell("audit --seed 1 --count 1000 --k-max 20");
    ensure!(code == 0 && v["checks"]["pass"] == true, "audit command failed: {}", v["checks"]);
    Ok("1000 random tuples pass all six residue identities".into())
}

fn family_witnesses() -> Result<Vec<(u64, u32, SolutionWitness)>, String> {
    let mut out = Vec::new();
    for d in (3..=200u64).filter(|d| d % 4 == 3 && is_squarefree(*d)) {
        for p in [3u32, 5, 7] {
            let inst = EquationInstance::without_q(d, p).map_err(|e| e.to_string())?;
            if classify(&inst).map_err(|e| e.to_string())?.kind == VerdictKind::HypothesisRefused {
                continue;
            }
            let ws =
                enumerate_family(&inst, &FamilyBounds { u_max: 61, m_max: 3 }, false, 4).map_err(|e| e.to_string())?;
            out.extend(ws.into_iter().map(|w| (d, p, w)));
        }
    }
    Ok(out)
}

fn lehmer_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let pair = random_pair(&mut rng, 300);
        for n in (1..=29).step_by(2) {
            let rec = lehmer_number(&pair, n as usize).map_err(|e| e.to_string())?;
            ensure!(closed_form_odd(&pair, n) == Some(rec), "{pair:?} at n = {n}");
        }
    }
    let (code, v) = nagell("lehmer --a 175 --b -9 --p 3 --k-max 3");
    ensure!(code == 0, "lehmer exited {code}");
    ensure!(v["result"]["sequence"][2]["value"] == "129", "l_3 = {}", v["result"]["sequence"][2]["value"]);
    ensure!(
        v["result"]["primitive"]["primitiveDivisors"] == serde_json::json!(["43"]),
        "divisors {}",
        v["result"]["primitive"]
    );
    let divisor: u64 = v["result"]["primitive"]["primitiveDivisors"][0].as_str().unwrap_or("0").parse().unwrap_or(0);
    ensure!(divisor % 3 == 1, "{divisor} != 1 (mod 3)");
    let ws = family_witnesses()?;
    ensure!(!ws.is_empty(), "no family witnesses to check");
    for (d, p, w) in &ws {
        ensure!(w.checks.lehmer_identity == Some(true), "identity fails for d = {d}, p = {p}: {w:?}");
    }
    Ok(format!(
        "closed form matches on 100 pairs; l_3(175, -9) = 129 = 3 * 43; identity holds on {} witnesses",
        ws.len()
    ))
}

fn bhv_desk_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let pair = random_pair(&mut rng, 1000);
        for n in 31..=36 {
            ensure!(has_primitive_divisor(&pair, n).map_err(|e| e.to_string())?, "{pair:?} lacks one at n = {n}");
        }
    }
    Ok("50 pairs have primitive divisors at every n in 31..=36".into())
}

fn fib_lucas() -> Outcome {
    let (code, v) = nagell("fib --k-max 300");
    ensure!(code == 0, "fib exited {code}");
    let r = &v["result"];
    for (key, want) in
        [("lucasSquares", vec![1, 3]), ("fibonacciSquares", vec![0, 1, 2, 12]), ("fibonacciFiveSquares", vec![5])]
    {
        ensure!(r[key] == serde_json::json!(want), "{key} = {}, expected {want:?}", r[key]);
    }
    for k in 2..=500 {
        for eps in [1, -1] {
            ensure!(
                identity_audit(k, eps).map_err(|e| e.to_string())?.pass(),
                "identity fails at k = {k}, eps = {eps}"
            );
        }
    }
    Ok("squares at L {1,3}, F {0,1,2,12}, F = 5x^2 {5}; identities hold for 2 <= k <= 500".into())
}

fn corollaries() -> Outcome {
    use nagell_core::solver::corollary_suite;
    let twin = corollary_suite(Corollary::TwinPrime, &CorollaryRanges::default()).map_err(|e| e.to_string())?;
    ensure!(twin.status == SuiteStatus::Passed, "twin-prime family {:?}", twin.status);
    let twin_ps: Vec<u32> = (5..=100).filter(|&p| is_prime_u64(p as u64) && is_prime_u64(p as u64 + 2)).collect();
    for p in &twin_ps {
        ensure!(twin.rows.iter().any(|r| r.p == *p), "no rows for twin prime {p}");
    }
    let three = corollary_suite(Corollary::PowerOfThree, &CorollaryRanges::default()).map_err(|e| e.to_string())?;
    ensure!(three.status == SuiteStatus::Passed, "power-of-three family {:?}", three.status);
    ensure!(three.rows.len() == 4 * POWER_OF_TWO_SET.len(), "{} rows", three.rows.len());
    let (code, v) = nagell("corollary --set 2");
    ensure!(code == 0, "corollary 2 exited {code}");
    let vacuous = v["checks"]["vacuous"].as_array().cloned().unwrap_or_default();
    ensure!(
        vacuous.len() == 7 && !vacuous.iter().any(|s| s.as_str().unwrap_or("").starts_with("d = 2:")),
        "vacuous {vacuous:?}"
    );
    let rows = v["result"]["rows"].as_array().cloned().unwrap_or_default();
    ensure!(!rows.is_empty() && rows.iter().all(|r| r["d"] == 2 && r["pass"] == true), "family 2 rows {rows:?}");
    Ok(format!(
        "family 1: {} rows over p in {twin_ps:?} ({} gated); family 3: {} rows; family 2 vacuous except d = 2 ({} rows)",
        twin.rows.len(),
        twin.gated.len(),
        three.rows.len(),
        rows.len()
    ))
}

fn determinism() -> Outcome {
    let strip = |mut v: Value| {
        v.as_object_mut().map(|o| o.remove("elapsedMs"));
        serde_json::to_string(&v).unwrap_or_default()
    };
    for args in [
        "search --d 7 --p 3 --q 43 --y-max 2000",
        "search --d 7 --p 5 --q 11 --N 15 --y-max 400",
        "solve --d 7 --p 3 --u-max 99",
    ] {
        let (c1, one) = nagell(&format!("{args} --workers 1"));
        let (c4, four) = nagell(&format!("{args} --workers 4"));
        ensure!(c1 == 0 && c4 == 0, "{args}: exit codes {c1}, {c4}");
        ensure!(one != Value::Null && strip(one) == strip(four), "{args}: outputs differ");
    }
    Ok("workers 1 and 4 give identical JSON for search and solve".into())
}

fn main() {
    let criteria: [Check; 12] = [
        ("worked witness (7, 3, 43)", worked_witness, Some(Duration::from_secs(5))),
        ("worked witness, exponent 15", general_witness, Some(Duration::from_secs(5))),
        ("class-number fixture", class_numbers, Some(Duration::from_secs(10))),
        ("d = 1, 2 (mod 4) gives nothing", residue_classes_empty, None),
        ("criterion necessity", criterion_necessity, None),
        ("hypothesis-gate fixture (23, 3, 5)", gate_fixture, None),
        ("congruence laws", congruence_laws, None),
        ("Lehmer consistency", lehmer_consistency, None),
        ("primitive divisors beyond 30", bhv_desk_check, None),
        ("Fibonacci/Lucas classification", fib_lucas, None),
        ("corollary suite", corollaries, None),
        ("determinism across workers", determinism, None),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match (result, limit) {
            (Ok(_), Some(l)) if elapsed > *l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
            (r, _) => r,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if result.is_err() {
            failed += 1;
        }
        println!("[{tag}] {:>2}. {name}: {detail} ({elapsed:.2?})", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
