//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the console.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shiftlab::experiments::*;
use shiftlab::shift_operators::coordinate_shift;
use shiftlab::submodule_builder::monomial_submodule;
use shiftlab::{GradedBasis, MultiIndex, Side, Verdict, WeightFamily, WeightSet};

type Outcome = std::result::Result<String, String>;

fn ensure(ok: bool, message: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message())
    }
}

fn column<'a>(report: &'a ExperimentReport, table: &str, name: &str) -> std::result::Result<Vec<&'a str>, String> {
    report
        .table(table)
        .and_then(|t| t.column(name))
        .ok_or_else(|| format!("missing column {table}.{name}"))
}

fn floats(values: &[&str]) -> Vec<f64> {
    values.iter().map(|v| v.parse().expect("numeric cell")).collect()
}

fn verdict(report: &ExperimentReport, name: &str) -> std::result::Result<Verdict, String> {
    report.verdict_of(name).ok_or_else(|| format!("missing verdict `{name}`"))
}

/// `Q[T*,T]Q + QTQ⊥T*Q` against `[(QTQ)*, QTQ]` in plain dense algebra.
fn dense_lemma1_residual(t: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    let n = t.nrows();
    let ts = t.transpose();
    let perp = DMatrix::identity(n, n) - q;
    let lhs = q * (&ts * t - t * &ts) * q + q * t * &perp * &ts * q;
    let y = q * t * q;
    let rhs = y.transpose() * &y - &y * y.transpose();
    (lhs - rhs).abs().max()
}

fn criterion_lemma1() -> Outcome {
    let report = run_lemma1_check(&Lemma1Params::default()).map_err(|e| e.to_string())?;
    let ms: BTreeSet<&str> = column(&report, "trials", "m")?.into_iter().collect();
    let degrees: Vec<usize> = column(&report, "trials", "N")?.iter().map(|v| v.parse().unwrap()).collect();
    let identity = floats(&column(&report, "trials", "identity_residual")?);
    let invariance = floats(&column(&report, "trials", "invariance_residual")?);
    ensure(identity.len() == 200, || format!("{} trials", identity.len()))?;
    ensure(ms == BTreeSet::from(["1", "2", "3"]), || format!("m values {ms:?}"))?;
    ensure(degrees.iter().all(|&n| n <= 16), || "N above 16".into())?;
    let worst = identity.iter().chain(&invariance).fold(0.0f64, |a, &b| a.max(b));
    ensure(worst < LEMMA1_TOLERANCE, || format!("residual {worst:e}"))?;
    ensure(!report.has_fatal_failure(), || "fatal check failed".into())?;

    // independent dense recomputation on fresh instances
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut oracle = 0.0f64;
    for _ in 0..40 {
        let m = rng.random_range(1..=3);
        let n = if m == 3 { rng.random_range(2..=8) } else { rng.random_range(2..=16) };
        let basis = Arc::new(GradedBasis::enumerate(m, n, 1).unwrap());
        let ln: Vec<f64> = basis.monomials().iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = WeightSet::<f64>::from_ln_weights(basis, ln, "oracle").unwrap();
        let e: Vec<u32> = (0..m).map(|_| rng.random_range(0..=(n / (2 * m)) as u32)).collect();
        let sub = monomial_submodule::<f64>(&w, &[(MultiIndex::new(e), 0)]).unwrap();
        let q = DMatrix::from(&sub.projection(Side::Submodule).matrix());
        let t = coordinate_shift::<f64>(&w, rng.random_range(0..m)).unwrap().to_dense();
        oracle = oracle.max(dense_lemma1_residual(&t, &q));
    }
    ensure(oracle < LEMMA1_TOLERANCE, || format!("dense oracle residual {oracle:e}"))?;
    Ok(format!("max residual {worst:e} over 200 trials; dense oracle {oracle:e}"))
}

fn criterion_example3() -> Outcome {
    let report = run_example3(&Example3Params::default()).map_err(|e| e.to_string())?;
    let ns: Vec<f64> = floats(&column(&report, "example3", "n")?);
    let ps: Vec<f64> = floats(&column(&report, "example3", "p")?);
    let computed = floats(&column(&report, "example3", "computed")?);
    let restricted = floats(&column(&report, "example3", "restricted")?);
    let stated = floats(&column(&report, "example3", "paper_stated")?);
    let flags = column(&report, "example3", "paper_matches_computation")?;
    ensure(computed.len() == 12, || format!("{} rows", computed.len()))?;
    let mut worst = 0.0f64;
    let mut worst_restricted = 0.0f64;
    for i in 0..computed.len() {
        let (n, p) = (ns[i], ps[i]);
        worst = worst.max((computed[i] - n.powf((1.0 - p) / p)).abs());
        worst_restricted = worst_restricted.max((restricted[i] - 1.0).abs());
        ensure((stated[i] - n.powf(1.0 - p)).abs() < 1e-12, || format!("stated column at n={n} p={p}"))?;
        let agrees = (computed[i] - stated[i]).abs() <= 1e-10;
        ensure(flags[i] == agrees.to_string(), || format!("match flag at n={n} p={p}"))?;
    }
    ensure(worst <= 1e-10, || format!("closed form off by {worst:e}"))?;
    ensure(worst_restricted <= 1e-12, || format!("restricted off by {worst_restricted:e}"))?;
    let unmatched = flags.iter().filter(|f| **f == "false").count();
    Ok(format!(
        "max |computed - n^((1-p)/p)| = {worst:e}, max |restricted - 1| = {worst_restricted:e}, n^(1-p) unmatched in {unmatched} rows"
    ))
}

fn criterion_counterexample() -> Outcome {
    let report = run_counterexample_direct_sum(&CounterexampleParams::default()).map_err(|e| e.to_string())?;
    let blocks = floats(&column(&report, "restricted", "B")?);
    let values = floats(&column(&report, "restricted", "value")?);
    ensure(blocks.len() == 64, || format!("{} blocks", blocks.len()))?;
    let worst = blocks
        .iter()
        .zip(&values)
        .map(|(b, v)| (v - b.cbrt()).abs() / b.cbrt())
        .fold(0.0f64, f64::max);
    ensure(worst <= 1e-12, || format!("restricted differs from B^(1/3) by {worst:e}"))?;
    let full = verdict(&report, "full p=3")?;
    let restricted = verdict(&report, "restricted p=3")?;
    ensure(full == Verdict::Converging, || format!("full verdict {full}"))?;
    ensure(restricted == Verdict::Diverging, || format!("restricted verdict {restricted}"))?;
    Ok(format!("full {full}, restricted {restricted}, max relative |value - B^(1/3)| = {worst:e}"))
}

fn criterion_example5() -> Outcome {
    let report = run_example5(&Example5Params::default()).map_err(|e| e.to_string())?;
    let pairs = [(1, 1), (1, 2), (2, 2)];
    for (i, j) in pairs {
        let v = verdict(&report, &format!("trace_norm delta=1 [Z{i}*,Z{j}]"))?;
        ensure(v == Verdict::Converging, || format!("delta=1 [Z{i}*,Z{j}] {v}"))?;
        let v = verdict(&report, &format!("trace_norm delta=0.25 [Z{i}*,Z{j}]"))?;
        ensure(v != Verdict::Converging, || format!("delta=0.25 [Z{i}*,Z{j}] {v}"))?;
    }
    for i in 1..=2 {
        let v = verdict(&report, &format!("hilbert_schmidt delta=1.25 Z{i}"))?;
        ensure(v == Verdict::Converging, || format!("delta=1.25 Z{i} {v}"))?;
    }
    let low = verdict(&report, "trace_norm delta=0.25 [Z1*,Z2]")?;
    Ok(format!("delta=1 trace norms CONVERGING, delta=0.25 {low}, delta=1.25 Hilbert-Schmidt CONVERGING"))
}

fn criterion_berger_shaw() -> Outcome {
    let report = run_berger_shaw_random(&BergerShawRandomParams::default()).map_err(|e| e.to_string())?;
    let instances: BTreeSet<&str> = column(&report, "rows", "instance")?.into_iter().collect();
    let positive = floats(&column(&report, "rows", "trace_positive")?);
    let negative = floats(&column(&report, "rows", "trace_norm_negative")?);
    ensure(instances.len() == 50, || format!("{} instances", instances.len()))?;
    // the C part is the negative spectrum, so ||C||_1 = trace_norm_negative
    let violations = positive
        .iter()
        .zip(&negative)
        .filter(|(p, c)| !(**p >= -BERGER_SHAW_TOLERANCE && **p <= **c + BERGER_SHAW_TOLERANCE))
        .count();
    ensure(violations == 0, || format!("{violations} violating rows"))?;
    ensure(!report.has_fatal_failure(), || "fatal check failed".into())?;
    Ok(format!("0 violations in {} rows over 50 instances", positive.len()))
}

fn criterion_critical_exponent() -> Outcome {
    let fit = |n, reference| {
        critical_exponent(&WeightFamily::DruryArveson, 2, (0, 0), n, reference, 1e-8, 0.5)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("no fit at N={n}"))
    };
    let at40 = fit(40, 36)?;
    let at56 = fit(56, 52)?;
    let (c40, c56) = (at40.critical_exponent, at56.critical_exponent);
    ensure((1.7..=2.3).contains(&c40), || format!("N=40 exponent {c40}"))?;
    ensure((1.7..=2.3).contains(&c56), || format!("N=56 exponent {c56}"))?;
    ensure((c56 - c40).abs() <= 0.05, || format!("fit moved from {c40} to {c56}"))?;
    Ok(format!("N=40: {c40:.4}, N=56 oracle: {c56:.4}"))
}

fn criterion_arveson() -> Outcome {
    let report = run_arveson_probe(&ArvesonProbeParams::default()).map_err(|e| e.to_string())?;
    let mut seen = Vec::new();
    for (i, j) in [(1, 1), (1, 2), (2, 2)] {
        let v = verdict(&report, &format!("submodule [Y{i}*,Y{j}] p=3"))?;
        ensure(v == Verdict::Converging, || format!("[Y{i}*,Y{j}] {v}"))?;
        seen.push(format!("[Y{i}*,Y{j}] {v}"));
    }
    let residual = floats(&column(&report, "dimensions", "invariance_residual")?);
    ensure(residual.iter().all(|r| *r < 1e-12), || "submodule not invariant".into())?;
    Ok(seen.join(", "))
}

fn criterion_properties() -> Outcome {
    let mut failures = Vec::new();
    for (name, property) in common::PROPERTIES {
        if let Err(e) = property(common::CASES) {
            failures.push(format!("{name}: {e}"));
        }
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("{} suites x {} cases", common::PROPERTIES.len(), common::CASES))
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn criterion_reproducibility() -> Outcome {
    type Runner = Box<dyn Fn() -> Result<ExperimentReport>>;
    let runs: Vec<(&str, Runner)> = vec![
        ("lemma1-check", Box::new(|| run_lemma1_check(&Lemma1Params { trials: 40, seed: 11 }))),
        (
            "berger-shaw random",
            Box::new(|| run_berger_shaw_random(&BergerShawRandomParams { instances: 10, seed: 5 })),
        ),
        ("berger-shaw", Box::new(|| run_berger_shaw_check(&BergerShawParams::default()))),
        ("example3", Box::new(|| run_example3(&Example3Params::default()))),
        (
            "counterexample",
            Box::new(|| {
                run_counterexample_direct_sum(&CounterexampleParams {
                    max_blocks: 16,
                    ..Default::default()
                })
            }),
        ),
        (
            "example5",
            Box::new(|| {
                run_example5(&Example5Params {
                    degree_sweep: vec![8, 12, 16, 20],
                    ..Default::default()
                })
            }),
        ),
        (
            "arveson-probe",
            Box::new(|| {
                run_arveson_probe(&ArvesonProbeParams {
                    degree_sweep: vec![8, 12, 16, 20],
                    ..Default::default()
                })
            }),
        ),
        (
            "quotient-probe",
            Box::new(|| {
                run_quotient_smoothness_probe(&QuotientProbeParams {
                    generators: vec!["z1 - 0.5*z2^2".into()],
                    degree_sweep: vec![6, 8, 10, 12],
                    ..Default::default()
                })
            }),
        ),
    ];
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (name, run) in &runs {
        let mut trees = Vec::new();
        for attempt in 0..2 {
            let mut report = run().map_err(|e| format!("{name}: {e}"))?;
            report.runtime_seconds = attempt as f64;
            let dir = root.path().join(format!("{}-{attempt}", name.replace(' ', "-")));
            report.write_to(&dir).map_err(|e| e.to_string())?;
            trees.push(read_tree(&dir));
        }
        ensure(trees[0] == trees[1], || format!("{name} differs between runs"))?;
    }
    let a = run_lemma1_check(&Lemma1Params { trials: 40, seed: 11 }).map_err(|e| e.to_string())?;
    let b = run_lemma1_check(&Lemma1Params { trials: 40, seed: 12 }).map_err(|e| e.to_string())?;
    ensure(a.to_json() != b.to_json(), || "seed has no effect".into())?;
    Ok(format!("{} experiments byte-identical across two runs", runs.len()))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("1 lemma 1 identity", 30, criterion_lemma1),
        ("2 example 3 exact values", 10, criterion_example3),
        ("3 counterexample trends", 60, criterion_counterexample),
        ("4 example 5 thresholds", 300, criterion_example5),
        ("5 berger-shaw inequality", 60, criterion_berger_shaw),
        ("6 drury-arveson critical exponent", 180, criterion_critical_exponent),
        ("7 monomial arveson probe", 180, criterion_arveson),
        ("8 property suites", 60, criterion_properties),
        ("9 reproducibility", 600, criterion_reproducibility),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(limit) => {
                Err(format!("{detail}; took {:.1} s, limit {limit} s", elapsed.as_secs_f64()))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {name} ({:.2} s): {detail}", elapsed.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({:.2} s): {detail}", elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
