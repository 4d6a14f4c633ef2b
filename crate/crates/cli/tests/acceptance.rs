//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach stdout; exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;
use shimura_core::arith::{kronecker, primes_up_to};
use shimura_core::local::AdelicCase;
use shimura_core::pointcount::{count_curve, count_quotient, count_twist};
use shimura_core::quatsigma::{
    genus_curve, genus_quotient, sigma_nonzero, sigma_value, trace_hecke, twelve_sigma,
};
use shimura_core::{adelic_quotient, class_number, QuaternionDisc};

const BIN: &str = env!("CARGO_BIN_EXE_shimura-hasse");

type Outcome = Result<String, String>;

fn run(args: &[&str], cache: &Path) -> Result<(Vec<Value>, String), String> {
    let out = Command::new(BIN)
        .args(args)
        .arg("--cache")
        .arg(cache)
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let records = stdout
        .lines()
        .map(|l| serde_json::from_str(l).map_err(|e| format!("{l}: {e}")))
        .collect::<Result<_, _>>()?;
    Ok((records, stdout))
}

fn single(args: &[&str], cache: &Path) -> Result<Value, String> {
    let (mut records, _) = run(args, cache)?;
    if records.len() != 1 {
        return Err(format!("{args:?} printed {} records", records.len()));
    }
    Ok(records.remove(0))
}

fn expect(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn squarefree(n: u64) -> bool {
    (2..).take_while(|p| p * p <= n).all(|p| n % (p * p) != 0)
}

fn indefinite_up_to(bound: u64) -> Vec<u64> {
    (6..=bound)
        .filter(|&d| squarefree(d) && prime_factors(d).len() % 2 == 0)
        .collect()
}

/// Primitive reduced forms `(a, b, c)` of discriminant `d < 0`.
fn naive_class_number(d: i64) -> i64 {
    let mut count = 0;
    let mut a = 1;
    while 3 * a * a <= -d {
        for b in (1 - a)..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if gcd(gcd(a, b), c) == 1 {
                count += 1;
            }
        }
        a += 1;
    }
    count
}

fn is_fundamental(d: i64) -> bool {
    let n = d.unsigned_abs();
    match d.rem_euclid(4) {
        1 => squarefree(n),
        0 => {
            let k = d / 4;
            matches!(k.rem_euclid(4), 2 | 3) && squarefree(k.unsigned_abs())
        }
        _ => false,
    }
}

fn splits(d_k: i64, q: u64) -> bool {
    let q = q as i64;
    d_k % q != 0 && (0..4 * q).any(|x| (x * x - d_k).rem_euclid(4 * q) == 0)
}

/// `12 Sigma_n(D)` by enumerating, for each `t^2 < 4n`, every order whose
/// discriminant divides `t^2 - 4n` with square cofactor.
fn oracle_twelve_sigma(n: i64, d: u64) -> i64 {
    let primes = prime_factors(d);
    let mut total = 0;
    let mut t = 0i64;
    while t * t < 4 * n {
        let delta = t * t - 4 * n;
        let mut part = 0;
        let mut g = 1i64;
        while g * g <= -delta {
            let e = delta / (g * g);
            if delta % (g * g) == 0 && matches!(e.rem_euclid(4), 0 | 1) {
                let f = (1..)
                    .take_while(|k| k * k <= -e)
                    .filter(|k| e % (k * k) == 0 && matches!((e / (k * k)).rem_euclid(4), 0 | 1))
                    .last()
                    .unwrap_or(1);
                let d_k = e / (f * f);
                if gcd(f, d as i64) == 1 && primes.iter().all(|&q| !splits(d_k, q)) {
                    let s = primes
                        .iter()
                        .filter(|&&q| d_k % q as i64 != 0 && !splits(d_k, q))
                        .count();
                    let w = match e {
                        -3 => 6,
                        -4 => 4,
                        _ => 2,
                    };
                    part += ((12 / w) * naive_class_number(e)) << s;
                }
            }
            g += 1;
        }
        total += if t == 0 { part } else { 2 * part };
        t += 1;
    }
    total
}

fn genus_by_formula(d: u64) -> i64 {
    let primes = prime_factors(d);
    let phi: i64 = primes.iter().map(|&p| p as i64 - 1).product();
    let e2: i64 = primes
        .iter()
        .map(|&p| 1 - kronecker(-4, p as i64).unwrap() as i64)
        .product();
    let e3: i64 = primes
        .iter()
        .map(|&p| 1 - kronecker(-3, p as i64).unwrap() as i64)
        .product();
    (12 + phi - 3 * e2 - 4 * e3) / 12
}

fn within_weil(count: u64, genus: u64, p: u64, r: u32) -> bool {
    let q = (p as i128).pow(r);
    let trace = q + 1 - count as i128;
    trace * trace <= 4 * (genus as i128).pow(2) * q
}

fn criterion_1(cache: &Path) -> Outcome {
    let g = single(&["genus", "--D", "2461"], cache)?;
    let gq = single(&["genus", "--D", "2461", "--m", "107"], cache)?;
    expect(
        g["genus"] == 193,
        format!("genus --D 2461 gave {}", g["genus"]),
    )?;
    expect(
        gq["genus"] == 97 && gq["exact"] == true,
        format!("quotient genus record {gq}"),
    )?;
    Ok("genus 193, quotient genus 97 (exact)".into())
}

fn criterion_2(cache: &Path) -> Outcome {
    let r = single(&["classgroup", "--disc", "-23"], cache)?;
    expect(
        r["invariant_factors"] == serde_json::json!([3]),
        format!("classgroup record {r}"),
    )?;
    let mut tested = 0;
    for d in (3..=10_000i64).map(|n| -n).filter(|&d| is_fundamental(d)) {
        let h = class_number(d).map_err(|e| e.to_string())?;
        expect(h as i64 == naive_class_number(d), format!("h({d}) = {h}"))?;
        tested += 1;
    }
    Ok(format!(
        "Cl(-23) = [3]; {tested} fundamental discriminants match the form count"
    ))
}

fn criterion_3(cache: &Path) -> Outcome {
    let r = single(&["rayclass", "--ell", "23", "--cond", "107"], cache)?;
    expect(
        r["invariant_factors"] == serde_json::json!([17172]),
        format!("rayclass record {r}"),
    )?;
    expect(
        r["order"] == 3 * (107 * 107 - 1) / 2,
        format!("order {}", r["order"]),
    )?;
    Ok("ray class group [17172], order 3 * (107^2 - 1)/2".into())
}

fn criterion_4(cache: &Path) -> Outcome {
    let r = single(&["jordan", "--ell", "23", "--m", "107"], cache)?;
    expect(r["flag"] == true, format!("jordan flag {}", r["flag"]))?;
    let w = &r["witness"];
    expect(
        w["ray_class"]["invariant_factors"] == serde_json::json!([17172])
            && w["target"]["invariant_factors"] == serde_json::json!([3, 954])
            && w["surjects"] == false,
        format!("witness {w}"),
    )?;
    Ok("no surjection [17172] -> [3, 954]".into())
}

fn criterion_5(cache: &Path) -> Outcome {
    let r = single(&["adelic", "--D", "2461", "--m", "107"], cache)?;
    expect(r["adelic"] == true, format!("adelic {}", r["adelic"]))?;
    let scan = &r["scan"];
    expect(
        scan["bound"] == 4 * 97 * 97 && scan["failures"] == serde_json::json!([]),
        format!("scan {scan}"),
    )?;
    Ok(format!(
        "adelic, {} good primes below 37636 all pass",
        scan["primes_checked"]
    ))
}

fn criterion_6(cache: &Path) -> Outcome {
    let (records, _) = run(&["verify-example"], cache)?;
    let check = |name: &str| {
        records
            .iter()
            .find(|r| r["check"] == name)
            .map(|r| r["ok"] == true)
            .unwrap_or(false)
    };
    for name in [
        "twist_everywhere_local(23,107,-23)",
        "descent_verdict(23,107)",
        "degree_one_divisor(23,107)",
        "adelic_quotient(2461,107)",
        "cm_rational_point(23,107)",
    ] {
        expect(check(name), format!("check {name} missing or failed"))?;
    }
    let summary = records.last().ok_or("no output")?;
    expect(summary["ok"] == true, "summary not ok")?;
    Ok(format!("{} checks pass, exit 0", summary["checks"]))
}

fn criterion_7() -> Outcome {
    let all = indefinite_up_to(10_000);
    for &d in &all {
        let disc = QuaternionDisc::new(d).map_err(|e| e.to_string())?;
        let g = genus_curve(&disc).map_err(|e| e.to_string())?;
        let t = trace_hecke(1, &disc).map_err(|e| e.to_string())?;
        expect(
            g as i64 == t && t == genus_by_formula(d),
            format!("D = {d}: tr T_1 = {t}, genus {g}"),
        )?;
    }
    let small = indefinite_up_to(210);
    for &d in &small {
        let disc = QuaternionDisc::new(d).unwrap();
        for n in 1..=200i64 {
            let twelve = twelve_sigma(n, &disc).map_err(|e| e.to_string())?;
            let value = sigma_value(n, &disc).map_err(|e| e.to_string())?;
            expect(
                twelve as i64 == oracle_twelve_sigma(n, d)
                    && value * 12 == twelve.into()
                    && sigma_nonzero(n, &disc) == (value != 0.into()),
                format!("Sigma_{n}({d})"),
            )?;
        }
    }
    let mut counted = 0;
    let mut broken: Vec<String> = Vec::new();
    let mut odd_broken = 0;
    for &d in &small {
        let disc = QuaternionDisc::new(d).unwrap();
        let g = genus_curve(&disc).unwrap();
        for p in primes_up_to(50).into_iter().filter(|p| d % p != 0) {
            for m in (2..=d).filter(|m| d % m == 0) {
                let gq = genus_quotient(&disc, m).unwrap().bound();
                for r in 1..=4 {
                    let err = |e: shimura_core::Error| e.to_string();
                    let x = count_curve(&disc, p, r).map_err(err)?;
                    let q = count_quotient(&disc, m, p, r).map_err(err)?;
                    let t = count_twist(&disc, m, p, r).map_err(err)?;
                    let at = format!("D = {d}, m = {m}, p = {p}, r = {r}");
                    if 2 * q != x + t {
                        if r % 2 == 1 {
                            odd_broken += 1;
                        }
                        broken.push(format!("{at}: 2q = {}, x + t = {}", 2 * q, x + t));
                    }
                    expect(
                        within_weil(x, g, p, r)
                            && within_weil(q, gq, p, r)
                            && within_weil(t, g, p, r),
                        format!("Weil bound fails at {at}"),
                    )?;
                    counted += 1;
                }
            }
        }
    }
    if let Some(first) = broken.first() {
        return Err(format!(
            "doubling 2q = x + t fails for {} of {counted} count triples ({odd_broken} at odd r; \
             even-r twists equal the curve count); first: {first}",
            broken.len()
        ));
    }
    Ok(format!(
        "{} trace identities, {} x 200 Sigma values, {counted} count triples",
        all.len(),
        small.len()
    ))
}

fn criterion_8() -> Outcome {
    let mut pairs = 0;
    for d in indefinite_up_to(500) {
        let disc = QuaternionDisc::new(d).unwrap();
        for m in (2..=d).filter(|m| d % m == 0) {
            let r = adelic_quotient(&disc, m).map_err(|e| format!("D = {d}, m = {m}: {e}"))?;
            let prime_cofactor = shimura_core::arith::is_prime_u64(d / m);
            if m == d {
                expect(r.adelic == Some(true), format!("X_{d}^({d}) not adelic"))?;
            } else if !prime_cofactor {
                expect(
                    r.adelic == Some(false) && r.case == AdelicCase::Inadmissible,
                    format!("D = {d}, m = {m} should fail"),
                )?;
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (D, m) pairs, D <= 500"))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cache = dir.path().join("cache.jsonl");
    let args = ["search", "--ell-max", "200", "--m-max", "200"];
    let (cold, cold_text) = run(&[&args[..], &["--jobs", "1"]].concat(), &cache)?;
    let (_, warm_text) = run(&[&args[..], &["--jobs", "4"]].concat(), &cache)?;
    let other = dir.path().join("other.jsonl");
    let (_, parallel_cold_text) = run(&[&args[..], &["--jobs", "3"]].concat(), &other)?;
    expect(cold_text == warm_text, "cold and warm outputs differ")?;
    expect(
        cold_text == parallel_cold_text,
        "outputs differ across --jobs",
    )?;
    expect(
        cold.iter().any(|r| {
            r["ell"] == 23 && r["m"] == 107 && r["classification"] == "counterexample-quotient"
        }),
        "(23, 107) is not reported as a counterexample",
    )?;
    Ok(format!(
        "{} records, byte-identical over 3 runs",
        cold.len()
    ))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cache = dir.path().join("cache.jsonl");
    let criteria: Vec<(&str, Duration, Box<dyn Fn() -> Outcome>)> = vec![
        (
            "1 genus of X_2461 and its quotient",
            Duration::from_secs(1),
            Box::new(|| criterion_1(&cache)),
        ),
        (
            "2 class group of -23 and class numbers",
            Duration::from_secs(60),
            Box::new(|| criterion_2(&cache)),
        ),
        (
            "3 ray class group of conductor 107",
            Duration::from_secs(30),
            Box::new(|| criterion_3(&cache)),
        ),
        (
            "4 non-surjection over Q(sqrt -23)",
            Duration::from_secs(30),
            Box::new(|| criterion_4(&cache)),
        ),
        (
            "5 adelic solubility of X_2461^(107)",
            Duration::from_secs(600),
            Box::new(|| criterion_5(&cache)),
        ),
        (
            "6 verify-example",
            Duration::from_secs(600),
            Box::new(|| criterion_6(&cache)),
        ),
        (
            "7 trace, Sigma and point-count properties",
            Duration::from_secs(600),
            Box::new(criterion_7),
        ),
        (
            "8 adelic quotients for D <= 500",
            Duration::from_secs(300),
            Box::new(criterion_8),
        ),
        (
            "9 deterministic search output",
            Duration::from_secs(3600),
            Box::new(criterion_9),
        ),
    ];
    let mut failed = 0;
    for (name, limit, check) in &criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
