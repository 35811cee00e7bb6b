//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use carpet_lab::classify::{compare, CompareOptions, Outcome};
use carpet_lab::coding::{in_ve, OmegaClass};
use carpet_lab::hp::bits_for_digits;
use carpet_lab::index::{
    curve_coding, delta_lower, delta_upper, delta_upper_stream, gamma_bounds, gamma_coding, gamma_stream,
    monte_carlo_delta, Gauge, IndexReport, IndexValue,
};
use carpet_lab::measure::{big_u, check_lemmas, k_of_r, k_zero, ApproxSquare, CylinderChecker, OracleConfig};
use carpet_lab::runlength::BetaSequence;
use carpet_lab::{Carpet, Coding, Digit, Rational};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const FIG1A: &[(u32, u32)] =
    &[(0, 0), (1, 0), (7, 0), (3, 1), (4, 1), (6, 1), (7, 1), (2, 2), (4, 2), (5, 2), (6, 2), (1, 3), (2, 3)];
const FIG1B: &[(u32, u32)] =
    &[(0, 0), (1, 0), (2, 0), (7, 0), (4, 1), (5, 1), (6, 1), (2, 2), (3, 2), (4, 2), (5, 2), (0, 3), (7, 3)];

fn fig1a() -> Carpet {
    Carpet::from_pairs(8, 4, FIG1A).unwrap()
}

fn fig1b() -> Carpet {
    Carpet::from_pairs(8, 4, FIG1B).unwrap()
}

fn doubling() -> Carpet {
    Carpet::from_pairs(4, 2, &[(0, 0), (2, 0), (1, 1), (3, 1)]).unwrap()
}

fn q(p: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(d))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_carpet-lab"))
}

type Outcome_ = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run_cli(args: &[&str]) -> Result<Value, String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn field<'a>(v: &'a Value, path: &[&str]) -> &'a Value {
    path.iter().fold(v, |v, k| &v[*k])
}

fn dec(v: &Value) -> f64 {
    v["decimal"].as_str().and_then(|s| s.parse().ok()).unwrap_or(f64::NAN)
}

/// 20 valid random carpets, fixed by seed.
fn random_specs() -> Vec<Carpet> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut out = Vec::new();
    while out.len() < 20 {
        let n = rng.gen_range(3..=5u32);
        let m = rng.gen_range(2..n);
        let digits: Vec<Digit> =
            (0..n * m).filter(|_| rng.gen_bool(0.45)).map(|c| Digit::new(c % n, c / n)).collect();
        if digits.len() > 8 {
            continue;
        }
        if let Ok(c) = Carpet::new(n, m, digits) {
            out.push(c);
        }
    }
    out
}

fn criterion_1() -> Outcome_ {
    let a = run_cli(&["analyze", data("fig1a.json").to_str().unwrap()])?;
    let b = run_cli(&["analyze", data("fig1b.json").to_str().unwrap()])?;
    ensure(a["fiber"] == serde_json::json!([3, 4, 4, 2]), "fig1a fiber")?;
    ensure(field(&a, &["flags", "non_doubling", "holds"]) == &Value::Bool(true), "fig1a non-doubling")?;
    let (l2, l3, l8, l13) = (2f64.ln(), 3f64.ln(), 8f64.ln(), 13f64.ln());
    let dm = (1.5f64).ln() / (2.0 * l8);
    let da = (1.5f64).ln() / (13.0f64 / 3.0).ln();
    let gm = (l13 - l2 / 3.0) / (l13 - l3 / 3.0);
    ensure((dec(&a["delta_max"]) - dm).abs() < 5e-13, format!("delta_max {}", dec(&a["delta_max"])))?;
    ensure((dec(&a["delta_aver"]) - da).abs() < 5e-13, "Delta_aver")?;
    ensure((dec(&a["gamma_max"]) - gm).abs() < 5e-13, "gamma_max")?;
    ensure(field(&a, &["dim_ve", "value", "exact"]).as_str() == Some("0"), "fig1a dim V_E")?;
    ensure(b["fiber"] == serde_json::json!([4, 3, 4, 2]), "fig1b fiber")?;
    ensure(field(&b, &["delta_max", "exact"]).as_str() == Some("1/6"), "fig1b delta_max")?;
    ensure(field(&b, &["dim_ve", "value", "exact"]).as_str() == Some("1/3"), "fig1b dim V_F")?;
    Ok(format!("delta_max = {}", a["delta_max"]["decimal"].as_str().unwrap_or("?")))
}

fn criterion_2() -> Outcome_ {
    let v = compare(&fig1a(), &fig1b(), &CompareOptions::default()).map_err(|e| e.to_string())?;
    ensure(v.outcome == Outcome::NotEquivalent, format!("outcome {:?}", v.outcome))?;
    let cert = |name: &str| v.certificates.iter().find(|c| c.invariant == name);
    let dim = cert("dim V").ok_or("no dim V certificate")?;
    ensure(dim.value_e == "0" && dim.value_f == "1/3", format!("dim V {} vs {}", dim.value_e, dim.value_f))?;
    let a0 = cert("a_0").ok_or("no a_0 certificate")?;
    ensure(a0.value_e == "3" && a0.value_f == "4", "a_0 values")?;
    Ok(format!("{} certificates", v.certificates.len()))
}

/// Sums `mu` over every rank-`k` square, as numerators over `N^ell`.
fn partition_total(c: &Carpet, k: u64) -> (BigUint, BigUint) {
    let ell = c.ell(k) as usize;
    let rows: Vec<u32> = (0..c.m()).filter(|&j| c.a(j) > 0).collect();
    let digits = c.digits();
    let mut total = BigUint::zero();
    let (mut x, mut y) = (vec![0u32; k as usize], vec![0u32; ell]);
    let mut idx = vec![0usize; ell];
    'outer: loop {
        for t in 0..ell {
            if t < k as usize {
                x[t] = digits[idx[t]].i;
                y[t] = digits[idx[t]].j;
            } else {
                y[t] = rows[idx[t]];
            }
        }
        let sq = ApproxSquare::new(c, x.clone(), y.clone()).expect("square meets the carpet");
        total += sq.numerator(c);
        let mut t = ell;
        loop {
            if t == 0 {
                break 'outer;
            }
            t -= 1;
            idx[t] += 1;
            let base = if t < k as usize { digits.len() } else { rows.len() };
            if idx[t] < base {
                break;
            }
            idx[t] = 0;
        }
    }
    (total, BigUint::from(c.big_n()).pow(ell as u32))
}

fn criterion_3() -> Outcome_ {
    let mut specs = vec![fig1a(), fig1b()];
    specs.extend(random_specs());
    let mut checked = 0;
    for (s, c) in specs.iter().enumerate() {
        for k in 1..=5 {
            let (sum, whole) = partition_total(c, k);
            ensure(sum == whole, format!("spec {s}, k = {k}: mass {sum}/{whole}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (spec, k) pairs sum to 1"))
}

fn random_coding(rng: &mut ChaCha8Rng, c: &Carpet) -> Coding {
    let d = c.digits();
    let pre: Vec<Digit> = (0..rng.gen_range(0..6)).map(|_| d[rng.gen_range(0..d.len())]).collect();
    let per: Vec<Digit> = (0..rng.gen_range(1..6)).map(|_| d[rng.gen_range(0..d.len())]).collect();
    Coding::new(pre, per).unwrap()
}

fn criterion_4() -> Outcome_ {
    let mut specs = vec![fig1a(), fig1b(), doubling()];
    specs.extend(random_specs().into_iter().take(5));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut total = 0u64;
    for (s, c) in specs.iter().enumerate() {
        let chk = CylinderChecker::new(c, 30);
        for _ in 0..100_000 {
            let w = random_coding(&mut rng, c);
            let k = rng.gen_range(1..=40);
            ensure(chk.check(c, &w, k), format!("spec {s}: violation at k = {k} for {w:?}"))?;
            total += 1;
        }
    }
    Ok(format!("{total} pairs over {} specs, 0 violations", specs.len()))
}

fn criterion_5() -> Outcome_ {
    let c = fig1a();
    let cfg = OracleConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut lower_sides, mut beta_lower) = (0, 0);
    for i in 0..100 {
        let w = random_coding(&mut rng, &c);
        let e = [4u32, 5, 7][i % 3];
        let r = Rational::new(BigInt::from(rng.gen_range(9..=64)), BigInt::from(8u64.pow(e + 2)));
        let rho = q(1, 512 * rng.gen_range(2..=8));
        let depth = k_of_r(&c, &(&rho * &r)).map_err(|e| e.to_string())? + 6;
        let rep = check_lemmas(&c, &w, &r, &rho, depth, &cfg).map_err(|e| format!("triple {i}: {e}"))?;
        ensure(rep.ratio_pass(), format!("triple {i}: ratio sandwich violated"))?;
        ensure(rep.beta_pass(), format!("triple {i}: run-length sandwich violated"))?;
        lower_sides += usize::from(rep.ratio_lower.is_some());
        beta_lower += usize::from(rep.beta_lower.is_some());
    }
    Ok(format!("100 triples, 0 violations ({lower_sides} ratio lower sides, {beta_lower} run-length lower sides)"))
}

fn criterion_6() -> Outcome_ {
    let g = Gauge::neg_log();
    let a = fig1a();
    let w = carpet_lab::classify::ve_witness(&a).ok_or("fig1a has no V_E witness")?.first;
    let lo = delta_lower(&a, &w, &g, 50).map_err(|e| e.to_string())?;
    let up: IndexReport = delta_upper(&a, &w, &g, 100, 50).map_err(|e| e.to_string())?;
    let dm = a.delta_max_form().map_err(|e| e.to_string())?;
    ensure(lo.value.exact() == Some(&dm), "lower index on V_E")?;
    ensure(up.closed_form.as_ref().and_then(|c| c.value.exact()) == Some(&dm), "upper index on V_E")?;
    let b = fig1b();
    let w0 = Coding::from_pairs(&[(4, 1)], &[(0, 0)]).unwrap();
    ensure(w0.omega_class(&b) == OmegaClass::InOmega0 && !in_ve(&b, &w0), "coding class")?;
    let lo = delta_lower(&b, &w0, &g, 50).map_err(|e| e.to_string())?;
    let up: IndexReport = delta_upper(&b, &w0, &g, 100, 50).map_err(|e| e.to_string())?;
    ensure(lo.value == IndexValue::zero(50), "lower index off V_F")?;
    ensure(up.closed_form.map(|c| c.value) == Some(IndexValue::zero(50)), "upper index off V_F")?;
    Ok("V_E witness gives delta_max on both sides; bottom-row coding gives 0".into())
}

fn criterion_7() -> Outcome_ {
    let c = fig1a();
    let depth = 100_000;
    let scale = (1.5f64).ln() / 8f64.ln();
    let mut worst = 0f64;
    for (p, d) in [(0, 1), (1, 8), (1, 4), (3, 8), (1, 2)] {
        let t = q(p, d);
        let cc = curve_coding(&c, &t, depth, None).map_err(|e| e.to_string())?;
        let mut next = cc.checkpoints.iter().peekable();
        for parts in BetaSequence::new(&c, cc.y_letters()).take(depth as usize) {
            if next.peek() == Some(&&parts.k) {
                next.next();
                let expect = (p as u64 * parts.k) / d as u64;
                ensure(parts.beta == expect, format!("t' = {p}/{d}: beta({}) = {} != {expect}", parts.k, parts.beta))?;
            }
        }
        ensure(next.next().is_none(), "not every checkpoint was reached")?;
        let r: IndexReport = delta_upper_stream(&c, cc.y_letters(), &Gauge::neg_log(), depth).map_err(|e| e.to_string())?;
        let sup = r.empirical.unwrap().tail_sup;
        let target = p as f64 / d as f64 * scale;
        let rel = if target == 0.0 { sup.abs() } else { (sup - target).abs() / target };
        ensure(rel <= 0.05, format!("t' = {p}/{d}: tail sup {sup} vs {target}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("all checkpoints exact; worst relative gap {worst:.2e}"))
}

fn criterion_8() -> Outcome_ {
    let c = fig1a();
    let r = monte_carlo_delta(&c, 200, 1_000_000, 2024).map_err(|e| e.to_string())?;
    let da = c.invariants(30).map_err(|e| e.to_string())?.delta_aver.to_f64();
    ensure(r.beta_over_k.median < 0.01, format!("median beta/k = {}", r.beta_over_k.median))?;
    ensure(
        (0.6..=1.4).contains(&r.beta_over_log.median),
        format!("median beta/log = {}", r.beta_over_log.median),
    )?;
    ensure(
        (r.delta_aver.median - da).abs() <= 0.5 * da,
        format!("median Delta estimate {} vs {da}", r.delta_aver.median),
    )?;
    Ok(format!(
        "medians: beta/k {:.2e}, beta/log {:.3}, Delta {:.4} (closed {da:.4})",
        r.beta_over_k.median, r.beta_over_log.median, r.delta_aver.median
    ))
}

fn criterion_9() -> Outcome_ {
    let c = fig1a();
    let cc = gamma_coding(&c, 10_000, None).map_err(|e| e.to_string())?;
    let r = gamma_stream::<f64, _>(&c, cc.y_letters(), 10_000, 40).map_err(|e| e.to_string())?;
    let gmax = r.gamma_max.to_f64();
    let e = r.empirical.unwrap();
    ensure(e.tail_sup >= 0.98 * gmax, format!("tail sup {} < 0.98 * {gmax}", e.tail_sup))?;
    ensure(e.running_sup <= gmax + 1e-9, format!("running sup {} exceeds {gmax}", e.running_sup))?;
    Ok(format!("estimate {:.6} of gamma_max {gmax:.6}", e.tail_sup))
}

fn criterion_10() -> Outcome_ {
    let c = doubling();
    let cfg = OracleConfig { digits: 30, ..OracleConfig::default() };
    let bits = bits_for_digits(30);
    let rho = q(1, 128);
    let k0 = k_zero(&c, &rho).map_err(|e| e.to_string())?;
    let c1 = c.c0(bits).powi((k0 + 4) as u32).scale_rational(&q(4, 1));
    let log_c1 = c1.ln().lo_f64();
    let codings = [
        Coding::from_pairs(&[], &[(0, 0)]).unwrap(),
        Coding::from_pairs(&[(2, 0)], &[(1, 1), (0, 0)]).unwrap(),
        Coding::from_pairs(&[(1, 1)], &[(3, 1)]).unwrap(),
    ];
    let mut worst = f64::NEG_INFINITY;
    for w in &codings {
        let z = w.pi(&c);
        for e in 3..=10u32 {
            let r = Rational::new(BigInt::one(), BigInt::from(4u64.pow(e)));
            let depth = k_of_r(&c, &(&rho * &r)).map_err(|e| e.to_string())? + 6;
            let u = big_u(&c, &z, &r, &rho, depth, &cfg).map_err(|e| e.to_string())?;
            let log_u = u.upper.to_f64().unwrap().ln();
            ensure(log_u <= log_c1, format!("log U = {log_u} exceeds log C1 = {log_c1} at r = 4^-{e}"))?;
            worst = worst.max(log_u);
        }
        let g = Gauge::neg_log();
        let lo = delta_lower(&c, w, &g, 30).map_err(|e| e.to_string())?;
        let up: IndexReport = delta_upper(&c, w, &g, 2000, 30).map_err(|e| e.to_string())?;
        ensure(lo.value == IndexValue::zero(30), "lower index not 0")?;
        ensure(up.closed_form.map(|c| c.value) == Some(IndexValue::zero(30)), "upper closed form not 0")?;
        ensure(up.empirical.map(|e| e.running_sup) == Some(0.0), "empirical upper index not 0")?;
    }
    ensure(gamma_bounds::<f64>(&c, &codings[0], 100, 30).is_err(), "gamma should be reported as not applicable")?;
    Ok(format!("max certified log U {worst:.3} <= log C1 {log_c1:.3}; delta estimators all 0"))
}

fn criterion_11() -> Outcome_ {
    let dir = std::env::temp_dir().join(format!("carpet-lab-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let (a, b, w) = (data("fig1a.json"), data("fig1b.json"), data("ve_witness_1a.json"));
    let (a, b, w) = (a.to_str().unwrap(), b.to_str().unwrap(), w.to_str().unwrap());
    let commands: Vec<(&str, Vec<&str>, Vec<&str>)> = vec![
        ("analyze", vec!["analyze", a], vec![]),
        ("index", vec!["index", a, w, "--depth", "500", "--csv", "{side}"], vec!["csv"]),
        ("gamma", vec!["index", a, w, "--depth", "500", "--index", "gamma"], vec![]),
        ("beta", vec!["beta", a, w, "--depth", "200"], vec![]),
        ("oracle", vec!["oracle", a, "--coding", w, "--r", "1/4096", "--rho", "1/1024"], vec![]),
        ("compare", vec!["compare", a, b], vec![]),
        ("sample", vec!["sample", a, "--trials", "16", "--depth", "20000", "--seed", "3", "--jobs", "2"], vec![]),
        ("curve", vec!["curve", a, "--t", "1/4", "--depth", "5000", "--csv", "{side}"], vec!["csv"]),
        ("render", vec!["render", b, "--depth", "2", "--overlay"], vec![]),
    ];
    for (name, args, sides) in &commands {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let main = dir.join(format!("{name}-{run}.out"));
            let side = dir.join(format!("{name}-{run}.side"));
            let args: Vec<String> = args
                .iter()
                .map(|s| if *s == "{side}" { side.display().to_string() } else { s.to_string() })
                .collect();
            let status = bin().args(&args).arg("-o").arg(&main).status().map_err(|e| e.to_string())?;
            ensure(status.success(), format!("{name} exited with {status}"))?;
            let mut bytes = std::fs::read(&main).map_err(|e| e.to_string())?;
            if !sides.is_empty() {
                bytes.extend(std::fs::read(&side).map_err(|e| e.to_string())?);
            }
            outputs.push(bytes);
        }
        ensure(outputs[0] == outputs[1], format!("{name}: outputs differ between runs"))?;
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} commands byte-identical across runs", commands.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome_, Duration); 11] = [
        ("figure invariants", criterion_1, Duration::from_secs(1)),
        ("figure carpets not equivalent", criterion_2, Duration::from_secs(1)),
        ("partition of unit mass", criterion_3, Duration::from_secs(10)),
        ("consecutive square ratio", criterion_4, Duration::from_secs(30)),
        ("U sandwiches against the oracle", criterion_5, Duration::from_secs(300)),
        ("closed-form indices", criterion_6, Duration::from_secs(1)),
        ("extremal curve range", criterion_7, Duration::from_secs(60)),
        ("almost-everywhere bands", criterion_8, Duration::from_secs(600)),
        ("gamma_max attained", criterion_9, Duration::from_secs(60)),
        ("doubling control", criterion_10, Duration::from_secs(60)),
        ("CLI determinism", criterion_11, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let result = match result {
            Ok(msg) if took > *limit => Err(format!("{msg}; took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match result {
            Ok(msg) => println!("PASS [{:>2}] {name} ({took:.2?}): {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL [{:>2}] {name} ({took:.2?}): {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
