use rayon::prelude::*;

use super::report::{list, num, num_list, ExperimentReport, Table};
use super::{check_sweep, combine_verdicts, default_sweep, pairs, precondition, record_thresholds, weights, Result};
use crate::schatten_analysis::{convergence_diagnostic, schatten_norm, DiagnosticThresholds, Verdict, Window};
use crate::shift_operators::{coordinate_shift, cross_commutator};
use crate::weight_models::WeightFamily;

#[derive(Clone, Debug, PartialEq)]
pub struct Example5Params {
    pub m: usize,
    pub delta_values: Vec<f64>,
    pub degree_sweep: Vec<usize>,
    pub thresholds: DiagnosticThresholds,
}

impl Default for Example5Params {
    fn default() -> Self {
        Example5Params {
            m: 2,
            delta_values: vec![0.25, 1.0, 1.25],
            degree_sweep: default_sweep(2),
            thresholds: DiagnosticThresholds::default(),
        }
    }
}

struct Cell {
    trace_norms: Vec<f64>,
    hilbert_schmidt: Vec<f64>,
}

pub fn run_example5(params: &Example5Params) -> Result<ExperimentReport> {
    let m = params.m;
    precondition(m >= 2, || format!("m must be >= 2, got {m}"))?;
    precondition(!params.delta_values.is_empty(), || "no delta values".into())?;
    precondition(params.delta_values.iter().all(|&d| d > 0.0 && d.is_finite()), || {
        "delta must be positive".into()
    })?;
    check_sweep(&params.degree_sweep)?;

    let mut report = ExperimentReport::new("example5");
    report.param("m", m.to_string());
    report.param("delta_values", num_list(&params.delta_values));
    report.param("degree_sweep", list(&params.degree_sweep));
    record_thresholds(&mut report, &params.thresholds);

    let ij = pairs(m);
    let grid: Vec<(f64, usize)> = params
        .delta_values
        .iter()
        .flat_map(|&d| params.degree_sweep.iter().map(move |&n| (d, n)))
        .collect();
    let cells: Vec<Cell> = grid
        .par_iter()
        .map(|&(delta, n)| {
            let w = weights(&WeightFamily::FactorialDelta { delta }, m, n, 1)?;
            let trace_norms = ij
                .iter()
                .map(|&(i, j)| Ok(schatten_norm(&cross_commutator::<f64>(&w, i, j)?, 1.0, Window::Interior)?))
                .collect::<Result<_>>()?;
            let hilbert_schmidt = (0..m)
                .map(|i| Ok(schatten_norm(&coordinate_shift::<f64>(&w, i)?, 2.0, Window::Interior)?))
                .collect::<Result<_>>()?;
            Ok(Cell {
                trace_norms,
                hilbert_schmidt,
            })
        })
        .collect::<Result<_>>()?;

    let mut commutators = Table::new("cross_commutators", &["family", "m", "delta", "i", "j", "p", "N", "value"]);
    let mut shifts = Table::new("shift_hilbert_schmidt", &["family", "m", "delta", "i", "p", "N", "value"]);
    let mut summary = Table::new(
        "thresholds",
        &[
            "delta",
            "one_reductive_threshold",
            "paper_predicts_trace_class",
            "trace_norm_verdict",
            "s2_threshold",
            "paper_predicts_s2",
            "hilbert_schmidt_verdict",
            "consistent",
        ],
    );
    let sweep = params.degree_sweep.len();
    for (d_idx, &delta) in params.delta_values.iter().enumerate() {
        let rows = &cells[d_idx * sweep..(d_idx + 1) * sweep];
        let mut trace_verdicts = Vec::new();
        for (k, &(i, j)) in ij.iter().enumerate() {
            let trend: Vec<(usize, f64)> = params
                .degree_sweep
                .iter()
                .zip(rows)
                .map(|(&n, c)| (n, c.trace_norms[k]))
                .collect();
            for &(n, v) in &trend {
                commutators.push(vec![
                    "factorial-delta".into(),
                    m.to_string(),
                    num(delta),
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    "1".into(),
                    n.to_string(),
                    num(v),
                ]);
            }
            let d = convergence_diagnostic(&trend, &params.thresholds);
            trace_verdicts.push(d.verdict);
            report.verdict(
                format!("trace_norm delta={} [Z{}*,Z{}]", num(delta), i + 1, j + 1),
                d,
                &params.thresholds,
            );
        }
        let mut hs_verdicts = Vec::new();
        for i in 0..m {
            let trend: Vec<(usize, f64)> = params
                .degree_sweep
                .iter()
                .zip(rows)
                .map(|(&n, c)| (n, c.hilbert_schmidt[i]))
                .collect();
            for &(n, v) in &trend {
                shifts.push(vec![
                    "factorial-delta".into(),
                    m.to_string(),
                    num(delta),
                    (i + 1).to_string(),
                    "2".into(),
                    n.to_string(),
                    num(v),
                ]);
            }
            let d = convergence_diagnostic(&trend, &params.thresholds);
            hs_verdicts.push(d.verdict);
            report.verdict(format!("hilbert_schmidt delta={} Z{}", num(delta), i + 1), d, &params.thresholds);
        }
        let trace_verdict = combine_verdicts(trace_verdicts);
        let hs_verdict = combine_verdicts(hs_verdicts);
        let one_threshold = (m as f64 - 1.0) / 2.0;
        let s2_threshold = m as f64 / 2.0;
        let agrees = |predicted: bool, v: Verdict| predicted == (v == Verdict::Converging);
        let consistent = agrees(delta > one_threshold, trace_verdict) && agrees(delta > s2_threshold, hs_verdict);
        summary.push(vec![
            num(delta),
            num(one_threshold),
            (delta > one_threshold).to_string(),
            trace_verdict.to_string(),
            num(s2_threshold),
            (delta > s2_threshold).to_string(),
            hs_verdict.to_string(),
            consistent.to_string(),
        ]);
    }
    report.tables.push(summary);
    report.tables.push(commutators);
    report.tables.push(shifts);
    report
        .notes
        .push("verdicts are empirical statements about finite truncations, not proofs".into());
    Ok(report)
}
