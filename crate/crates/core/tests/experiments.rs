use shiftlab::experiments::*;
use shiftlab::schatten_analysis::decay_exponent_fit;
use shiftlab::{Complex, Verdict, WeightFamily};

fn floats(report: &ExperimentReport, table: &str, column: &str) -> Vec<f64> {
    report
        .table(table)
        .and_then(|t| t.column(column))
        .unwrap_or_else(|| panic!("{table}.{column}"))
        .iter()
        .map(|v| v.parse().unwrap())
        .collect()
}

fn cells<'a>(report: &'a ExperimentReport, table: &str, column: &str) -> Vec<&'a str> {
    report.table(table).and_then(|t| t.column(column)).unwrap()
}

#[test]
fn quotient_by_z1_matches_closed_form_exponent() {
    let report = run_quotient_smoothness_probe(&QuotientProbeParams::default()).unwrap();
    // quotient is span{z2^k}; [X2*,X2] is diagonal with entries 2/((k+2)(k+3))
    let diagonal: Vec<f64> = (0..400).map(|k| 2.0 / ((k as f64 + 2.0) * (k as f64 + 3.0))).collect();
    let oracle = decay_exponent_fit(&diagonal, 0.5).unwrap().critical_exponent;
    assert!((oracle - 0.5).abs() < 0.01);
    let estimate: f64 = cells(&report, "critical_exponent", "estimate")[0].parse().unwrap();
    assert!((estimate - oracle).abs() < 0.06, "{estimate} vs {oracle}");
    assert_eq!(cells(&report, "fits", "status"), ["ZERO", "ZERO", "FITTED"]);
    let dims = floats(&report, "dimensions", "dim_quotient");
    assert_eq!(dims, [9.0, 13.0, 17.0, 21.0, 29.0, 41.0]);
}

#[test]
fn quotient_by_all_coordinates_is_trivial() {
    let report = run_quotient_smoothness_probe(&QuotientProbeParams {
        generators: vec!["z1".into(), "z2".into()],
        ..Default::default()
    })
    .unwrap();
    assert!(floats(&report, "dimensions", "dim_quotient").iter().all(|&d| d == 1.0));
    assert!(floats(&report, "norms", "value").iter().all(|&v| v == 0.0));
}

#[test]
fn nonhomogeneous_quotient_runs_on_full_window() {
    let report = run_quotient_smoothness_probe(&QuotientProbeParams {
        generators: vec!["z1 - 0.5".into()],
        degree_sweep: vec![6, 8, 10, 12],
        zero_variety_dimension: Some(1.0),
        ..Default::default()
    })
    .unwrap();
    assert_eq!(report.parameters["window"], "FULL");
    assert_eq!(report.parameters["zero_variety_dimension (as supplied)"], "1");
    assert!(floats(&report, "norms", "value").iter().all(|v| v.is_finite()));
}

#[test]
fn quotient_probe_rejects_one_variable() {
    let err = run_quotient_smoothness_probe(&QuotientProbeParams {
        m: 1,
        ..Default::default()
    })
    .unwrap_err();
    assert!(matches!(err, ExperimentError::Precondition(_)));
}

#[test]
fn coordinate_ideal_differs_from_ambient_by_finite_rank() {
    let report = run_arveson_probe(&ArvesonProbeParams {
        generators: vec!["z1".into(), "z2".into()],
        degree_sweep: vec![8, 12, 16, 20],
        ..Default::default()
    })
    .unwrap();
    for (i, j) in [(1, 1), (1, 2), (2, 2)] {
        let ambient = report.verdict_of(&format!("ambient [Z{i}*,Z{j}] p=3")).unwrap();
        let sub = report.verdict_of(&format!("submodule [Y{i}*,Y{j}] p=3")).unwrap();
        assert_eq!(ambient, sub, "[{i},{j}]");
    }
    assert!(floats(&report, "dimensions", "dim_quotient").iter().all(|&d| d == 1.0));
}

#[test]
fn homogeneous_probe_reports_without_asserting() {
    let report = run_arveson_probe(&ArvesonProbeParams {
        generators: vec!["z1^2 + z2^2".into()],
        degree_sweep: vec![8, 12, 16, 20],
        ..Default::default()
    })
    .unwrap();
    assert!(report.checks.is_empty());
    assert!(report.verdict_of("submodule [Y1*,Y2] p=3").is_some());
    assert!(floats(&report, "dimensions", "invariance_residual").iter().all(|&r| r < 1e-12));
}

#[test]
fn arveson_probe_rejects_nonhomogeneous_generators() {
    let err = run_arveson_probe(&ArvesonProbeParams {
        generators: vec!["z1 + z2^2".into()],
        ..Default::default()
    })
    .unwrap_err();
    assert!(matches!(err, ExperimentError::Precondition(_) | ExperimentError::Submodule(_)));
}

#[test]
fn berger_shaw_single_point_holds_with_zero_trace() {
    let report = run_berger_shaw_check(&BergerShawParams::default()).unwrap();
    assert!(!report.has_fatal_failure());
    let positive = floats(&report, "rows", "trace_positive");
    let negative = floats(&report, "rows", "trace_norm_negative");
    for (p, c) in positive.iter().zip(&negative) {
        assert!((p - c).abs() < 1e-12);
    }
    assert!(floats(&report, "rows", "trace_commutator").iter().all(|t| t.abs() < 1e-12));
}

#[test]
fn berger_shaw_nested_points_split_trace_evenly() {
    let points = vec![
        vec![Complex::new(0.5, 0.0)],
        vec![Complex::new(-0.3, 0.2)],
        vec![Complex::new(0.0, 0.1)],
    ];
    let report = run_berger_shaw_check(&BergerShawParams {
        sources: SourceSpec::Points(points),
        ..Default::default()
    })
    .unwrap();
    let n = floats(&report, "rows", "n");
    let positive = floats(&report, "rows", "trace_positive");
    let negative = floats(&report, "rows", "trace_norm_negative");
    assert_eq!(n.len(), 18);
    for i in 0..n.len() {
        assert!(positive[i] >= -1e-12 && (positive[i] - negative[i]).abs() < 1e-10);
        if n[i] > 1.0 {
            assert!(positive[i] > 1e-3);
        }
    }
}

#[test]
fn example5_summary_is_consistent_with_thresholds() {
    let report = run_example5(&Example5Params {
        delta_values: vec![0.25, 1.25],
        ..Default::default()
    })
    .unwrap();
    assert_eq!(cells(&report, "thresholds", "consistent"), ["true", "true"]);
    assert_eq!(cells(&report, "thresholds", "trace_norm_verdict")[1], "CONVERGING");
    assert_eq!(report.verdict_of("hilbert_schmidt delta=0.25 Z1"), Some(Verdict::Diverging));
}

#[test]
fn counterexample_full_norm_matches_partial_sums() {
    let report = run_counterexample_direct_sum(&CounterexampleParams {
        max_blocks: 20,
        p_values: vec![3.0, 2.0],
        ..Default::default()
    })
    .unwrap();
    let b = floats(&report, "full", "B");
    let p = floats(&report, "full", "p");
    let value = floats(&report, "full", "value");
    for i in 0..value.len() {
        let expected: f64 = (1..=b[i] as usize).map(|n| (n as f64).powf(1.0 - p[i])).sum::<f64>().powf(1.0 / p[i]);
        assert!((value[i] - expected).abs() < 1e-12 * expected);
    }
}

#[test]
fn critical_exponent_requires_coarser_reference() {
    let err = critical_exponent(&WeightFamily::DruryArveson, 2, (0, 0), 20, 20, 1e-8, 0.5).unwrap_err();
    assert!(matches!(err, ExperimentError::Precondition(_)));
}

#[test]
fn malformed_generator_reports_position() {
    let err = run_arveson_probe(&ArvesonProbeParams {
        generators: vec!["z1*".into()],
        ..Default::default()
    })
    .unwrap_err();
    match err {
        ExperimentError::Parse { text, source } => {
            assert_eq!(text, "z1*");
            assert_eq!(source.position, 3);
        }
        other => panic!("{other}"),
    }
}
