//! Acceptance run: one `[PASS]`/`[FAIL] Cnn` line per criterion, each with
//! its wall-clock limit. Exits nonzero when any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command as Proc;
use std::time::{Duration, Instant};

use disclab_core::arith::is_prime;
use disclab_core::localfourier::{
    density_exact, magnitude_scaling, parseval_check, support_scan, u1_vanishing_check, valuation_ap_check,
    CellTable, DirectSupport, FourierSource, ResidueParams, ScanMode,
};
use disclab_core::realdensity::{
    davenport_check, enumerate_small_disc, fit_slope, mc_density_sweep, measure_change_check, BoxSpec, TestFn,
};
use disclab_core::sampling::substream;
use disclab_core::sievekit::{classifier_agreement, powerful_sweep};
use disclab_core::symrel::{alpha_structure, check_pair_relation, resultant_structure};
use disclab_core::Limits;
use num_rational::BigRational;
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rp(n: usize, p: u64, k: u32) -> ResidueParams {
    ResidueParams::new(n, p, k).expect("valid parameters")
}

fn c01() -> Outcome {
    let r = density_exact(rp(2, 3, 1), &Limits::default(), true).map_err(err)?;
    let brute = (0..9i64)
        .flat_map(|b| (0..9i64).map(move |c| (b, c)))
        .filter(|&(b, c)| (b * b - 4 * c).rem_euclid(9) == 0)
        .count() as u64;
    let want = BigRational::new(1.into(), 9.into());
    ensure(r.density() == want, || format!("density {}", r.density()))?;
    ensure(r.count == brute && r.oracle_count == Some(brute), || format!("count {} brute {brute}", r.count))?;
    Ok(format!("density {} = {brute}/81", r.density()))
}

fn c02() -> Outcome {
    let limits = Limits::default();
    let mut cases = 0;
    let mut phases = 0;
    for n in 1..=10usize {
        for k in 1..=10u32 {
            for p in (2u64..=1024).filter(|&p| is_prime(p)) {
                let bits = 2.0 * k as f64 * n as f64 * (p as f64).log2();
                if bits > 20.0 + 1e-9 {
                    continue;
                }
                let params = rp(n, p, k);
                let table = CellTable::build(params, &limits).map_err(err)?;
                let direct = DirectSupport::build(params, &limits).map_err(err)?;
                let m = params.modulus();
                let mut rng = substream(2, cases);
                for _ in 0..100 {
                    let u: Vec<u64> = (0..n).map(|_| rng.random_range(0..m)).collect();
                    let a = table.transform(&u);
                    let b = direct.transform(&u);
                    ensure(a.histogram == b.histogram, || format!("({n},{p},{k}) u={u:?}"))?;
                    phases += 1;
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} parameter sets, {phases} phases, all histograms equal"))
}

fn c03() -> Outcome {
    let limits = Limits::default();
    for (n, p, k) in [(2, 2, 1), (2, 3, 1), (3, 2, 1)] {
        let params = rp(n, p, k);
        let table = CellTable::build(params, &limits).map_err(err)?;
        let r = parseval_check(&table, &limits).map_err(err)?;
        ensure(r.holds, || format!("({n},{p},{k}) lhs {:?} density {}", r.lhs_value, r.density))?;
    }
    Ok("sum |psi^|^2 = density exactly on 3 parameter sets".into())
}

fn c04() -> Outcome {
    let limits = Limits::default();
    let params = rp(6, 2, 3);
    let table = CellTable::shared(params, &limits).map_err(err)?;
    ensure(table.classes == 1 << 18, || format!("{} classes", table.classes))?;
    let r = u1_vanishing_check(params, &limits).map_err(err)?;
    ensure(r.phases == 64 && r.divisor == 32, || format!("phases {} divisor {}", r.phases, r.divisor))?;
    ensure(r.violations.is_empty(), || format!("nonzero at u1 = {:?}", r.violations))?;
    Ok(format!(
        "{} claimed-zero phases vanish over 2^18 classes; nonzero at u1 in {:?}",
        r.claimed_zero, r.nonzero_allowed
    ))
}

fn bin() -> Proc {
    Proc::new(env!("CARGO_BIN_EXE_disclab"))
}

fn c05(tmp: &Path) -> Outcome {
    let limits = Limits::default();
    let mut notes = Vec::new();
    for (n, p, k, mode) in [
        (3, 2, 1, ScanMode::Exhaustive),
        (4, 2, 2, ScanMode::Restricted),
        (6, 2, 3, ScanMode::Restricted),
    ] {
        let table = CellTable::shared(rp(n, p, k), &limits).map_err(err)?;
        let r = support_scan(table.as_ref(), mode, &limits).map_err(err)?;
        ensure(r.violation_count == 0, || format!("({n},{p},{k}) {} violations", r.violation_count))?;
        notes.push(format!("({n},{p},{k}) {} phases", r.phases_scanned));
    }
    let planted = bin()
        .args(["support-scan", "--n", "3", "--p", "2", "--k", "1", "--planted", "--out"])
        .arg(tmp.join("planted"))
        .output()
        .map_err(err)?;
    ensure(planted.status.code() == Some(3), || format!("planted scan exit {:?}", planted.status.code()))?;
    let clean = bin()
        .args(["support-scan", "--n", "3", "--p", "2", "--k", "1", "--out"])
        .arg(tmp.join("clean"))
        .output()
        .map_err(err)?;
    ensure(clean.status.code() == Some(0), || format!("clean scan exit {:?}", clean.status.code()))?;
    Ok(format!("0 violations: {}; planted violation exits 3", notes.join(", ")))
}

fn c06() -> Outcome {
    let limits = Limits::default();
    let mut notes = Vec::new();
    for (n, p, k) in [(2, 3, 1), (3, 2, 2)] {
        let r = valuation_ap_check(rp(n, p, k), &limits).map_err(err)?;
        ensure(r.method == "exhaustive", || format!("({n},{p},{k}) method {}", r.method))?;
        ensure(r.violation_count == 0, || format!("({n},{p},{k}) {} violations", r.violation_count))?;
        notes.push(format!("({n},{p},{k}) {} points", r.points_checked));
    }
    Ok(format!("0 violations: {}", notes.join(", ")))
}

fn c07() -> Outcome {
    let mut checks = 0;
    for n in 3..=8 {
        let r = check_pair_relation(n, 10_000, 50, 7).map_err(err)?;
        ensure(r.passed(), || {
            format!(
                "n={n}: {} pair, {} translation failures",
                r.pair_divisibility_failures.len(),
                r.translation_failures.len()
            )
        })?;
        ensure((n <= 5) == (r.symbolic_verified == Some(true)), || format!("n={n} symbolic {:?}", r.symbolic_verified))?;
        checks += r.pair_checks;
    }
    Ok(format!("10^4 polynomials per n in 3..=8, {checks} pair checks, symbolic n <= 5"))
}

fn c08() -> Outcome {
    let mut alphas = Vec::new();
    for n in 3..=5 {
        let a = alpha_structure(n).map_err(err)?;
        ensure(a.passed(), || format!("n={n} alpha {} disc leading {}", a.alpha_n, a.disc_leading))?;
        alphas.push(format!("a{n}={}", a.alpha_n));
    }
    for n in 3..=4 {
        let r = resultant_structure(n).map_err(err)?;
        ensure(r.passed(), || format!("n={n} g2 degree {:?} leading {:?}", r.g2_cn_degree, r.g2_leading_constant))?;
        alphas.push(format!("deg g2(n={n})={}", r.g2_cn_degree.unwrap_or(0)));
    }
    Ok(alphas.join(", "))
}

fn c09() -> Outcome {
    let deltas: Vec<f64> = (4..=12).map(|e| 2f64.powi(-e)).collect();
    let mut notes = Vec::new();
    let mut problems = Vec::new();
    for n in 2..=4 {
        let s = mc_density_sweep(n, &deltas, 10_000_000, 1).map_err(err)?;
        let fit = fit_slope(&s).map_err(err)?;
        notes.push(format!("n={n} slope {:.4} (expect {:.4})", fit.slope, fit.expected));
        if (fit.slope - fit.expected).abs() > 0.07 {
            problems.push(format!("n={n} slope off by more than 0.07"));
        }
        if n == 2 {
            // each delta gets its own 95% interval, no multiplicity correction
            for (d, e) in s.deltas.iter().zip(&s.estimates) {
                if !e.contains(d / 4.0) {
                    problems.push(format!("delta {d}: {:.6} +- {:.3e} vs {:.6}", e.mean, e.half_width, d / 4.0));
                }
            }
        }
    }
    let notes = notes.join(", ");
    if problems.is_empty() {
        Ok(notes + "; n=2 within CI of delta/4 at every delta")
    } else {
        Err(format!("{notes}; {}", problems.join("; ")))
    }
}

fn c10() -> Outcome {
    let mut notes = Vec::new();
    for f in [TestFn::One, TestFn::NegativeDisc] {
        let r = measure_change_check(2, &f, 1_000_000, 1).map_err(err)?;
        let line = format!(
            "{}: {:.4}+-{:.4} vs {:.4}+-{:.4}",
            r.testfn, r.lhs.mean, r.lhs.half_width, r.rhs_total.mean, r.rhs_total.half_width
        );
        ensure(r.agrees, || line.clone())?;
        notes.push(line);
    }
    Ok(notes.join("; "))
}

fn c11() -> Outcome {
    let one = Some(BigRational::from_integer(1.into()));
    let count = enumerate_small_disc(&BoxSpec::new(2, 2, one).map_err(err)?, 1 << 30).map_err(err)?;
    ensure(count == 13, || format!("count {count}"))?;
    let mut cs = Vec::new();
    for h in [4u64, 8, 16] {
        let spec = BoxSpec::new(2, h, Some(BigRational::from_integer(4.into()))).map_err(err)?;
        let r = davenport_check(&spec, 1_000_000, 1, 1 << 30).map_err(err)?;
        cs.push(r.constant);
    }
    let earlier = cs[0].max(cs[1]);
    ensure(cs.iter().all(|c| c.is_finite()) && cs[2] <= earlier, || format!("C over H = 4, 8, 16: {cs:?}"))?;
    Ok(format!("count 13; C over H = 4, 8, 16: {:.3}, {:.3}, {:.3}", cs[0], cs[1], cs[2]))
}

fn c12() -> Outcome {
    let r = powerful_sweep(100_000, &[2, 3], 16).map_err(err)?;
    ensure(r.failures.is_empty(), || format!("{} failures, first {:?}", r.failures.len(), r.failures.first()))?;
    Ok(format!(
        "{} (m, k) pairs, {} queries, all confirmed by divisor scan",
        r.valid_pairs, r.queries
    ))
}

fn c13() -> Outcome {
    let limits = Limits::default();
    let mut total = 0;
    for p in [2u64, 3, 5] {
        for n in 2..=4 {
            let r = classifier_agreement(n, p, &limits).map_err(err)?;
            ensure(r.mismatches.is_empty(), || format!("p={p} n={n}: {} mismatches", r.mismatches.len()))?;
            total += r.polys;
        }
    }
    Ok(format!("{total} polynomials, gradient route equals lift enumeration"))
}

fn c14() -> Outcome {
    let recs = magnitude_scaling(6, 2, &[1, 2, 3], None, &Limits::default()).map_err(err)?;
    let mut per_k = Vec::new();
    let mut c3 = None;
    for k in 1..=3 {
        let gaps: Vec<f64> = recs.iter().filter(|r| r.k == k).filter_map(|r| r.log_gap).collect();
        let c = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        per_k.push(if c.is_finite() { format!("k={k} C={c:.3}") } else { format!("k={k} all zero") });
        if k == 3 {
            c3 = Some(c);
        }
    }
    let c = c3.unwrap_or(f64::NEG_INFINITY);
    ensure(c.is_finite(), || format!("no nonzero transform at k=3 ({})", per_k.join(", ")))?;
    for r in recs.iter().filter(|r| r.k == 3 && r.u2_val == 0) {
        if let Some(lm) = r.log_p_max {
            ensure(lm <= -12.0 + c + 1e-9, || format!("odd u2: log2 max {lm} > -12 + {c}"))?;
        }
    }
    let odd_max = recs
        .iter()
        .filter(|r| r.k == 3 && r.u2_val == 0)
        .map(|r| r.max_abs)
        .fold(0.0, f64::max);
    Ok(format!("{}; odd u2 at k=3: max |psi^| = {odd_max:e}", per_k.join(", ")))
}

fn c15(tmp: &Path) -> Outcome {
    let sweeps: [&[&str]; 14] = [
        &["density", "--n", "2,3", "--p", "2,3", "--k", "1"],
        &["fourier", "--n", "3", "--p", "2", "--k", "1", "--u", "1:0:3,2:2:1", "--check"],
        &["support-scan", "--n", "3", "--p", "2", "--k", "1,2", "--mode", "sampled", "--samples", "200"],
        &["valuation-scan", "--n", "2,3", "--p", "2", "--k", "1"],
        &["magnitude-scan", "--n", "4", "--p", "2", "--k", "1,2"],
        &["relations", "--n", "3,4", "--trials", "300"],
        &["resultant-structure", "--n", "3,4,5"],
        &["mc-density", "--n", "2,3", "--samples", "100000", "--delta", "0.25,0.0625"],
        &["measure-check", "--n", "2", "--samples", "100000"],
        &["enumerate-small-disc", "--n", "2,3", "--height", "2,3", "--y", "1,4"],
        &["davenport", "--n", "2", "--height", "4,8", "--samples", "100000"],
        &["powerful-divisor", "--up-to", "300", "--k", "2,3"],
        &["classify", "--n", "2,3", "--p", "2,3"],
        &["census", "--n", "2", "--height", "3,4", "--min-m", "2,6"],
    ];
    for args in sweeps {
        let name = args[0];
        let mut outputs = Vec::new();
        for threads in [1, 4, 8] {
            let out = tmp.join(format!("{name}-{threads}"));
            let st = bin()
                .args(args)
                .args(["--seed", "5", "--threads", &threads.to_string(), "--out"])
                .arg(&out)
                .output()
                .map_err(err)?;
            ensure(st.status.code() == Some(0), || {
                format!("{name} exit {:?}: {}", st.status.code(), String::from_utf8_lossy(&st.stderr))
            })?;
            let files: Vec<Vec<u8>> = ["csv", "json", "gp"]
                .iter()
                .map(|ext| fs::read(out.join(format!("{name}.{ext}"))).unwrap_or_default())
                .collect();
            outputs.push(files);
        }
        ensure(outputs[0] == outputs[1] && outputs[1] == outputs[2], || format!("{name} differs across threads"))?;
    }
    Ok("14 subcommands byte-identical (csv, json, gp) at 1, 4, 8 threads".into())
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let tmp = tmp.path();
    let criteria: Vec<(&str, &str, u64, Box<dyn Fn() -> Outcome>)> = vec![
        ("C01", "exact density (2,3,1)", 1, Box::new(c01)),
        ("C02", "cell route = direct route", 300, Box::new(c02)),
        ("C03", "Parseval", 60, Box::new(c03)),
        ("C04", "u1 vanishing at (6,2,3)", 600, Box::new(c04)),
        ("C05", "support near-AP scans", 900, Box::new(move || c05(tmp))),
        ("C06", "valuation near-AP", 120, Box::new(c06)),
        ("C07", "identity suite", 600, Box::new(c07)),
        ("C08", "resultant structure", 1800, Box::new(c08)),
        ("C09", "archimedean exponent", 1200, Box::new(c09)),
        ("C10", "measure change", 300, Box::new(c10)),
        ("C11", "small-disc count and Davenport", 600, Box::new(c11)),
        ("C12", "powerful divisor", 300, Box::new(c12)),
        ("C13", "strong/weak classifier", 600, Box::new(c13)),
        ("C14", "magnitude scaling", 1800, Box::new(c14)),
        ("C15", "determinism across threads", 600, Box::new(move || c15(tmp))),
    ];
    let mut failed = 0;
    for (id, what, limit, run) in &criteria {
        let t = Instant::now();
        let result = run();
        let took = t.elapsed();
        let result = match result {
            Ok(msg) if took > Duration::from_secs(*limit) => Err(format!("{msg}; over the {limit} s limit")),
            r => r,
        };
        match result {
            Ok(msg) => println!("[PASS] {id} {what} ({:.1} s): {msg}", took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {id} {what} ({:.1} s): {msg}", took.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
