use std::sync::Arc;

use rayon::prelude::*;

use super::report::{list, num, num_list, ExperimentReport, Table};
use super::{check_p, p_label, precondition, record_thresholds, Result};
use crate::graded_basis::{GradedBasis, MultiIndex};
use crate::schatten_analysis::{
    convergence_diagnostic, schatten_from_values, singular_values, trace, DiagnosticThresholds, Window,
};
use crate::shift_operators::{coordinate_shift, direct_sum, TruncatedOperator};
use crate::submodule_builder::monomial_submodule;
use crate::weight_models::WeightSet;

#[derive(Clone, Debug, PartialEq)]
pub struct Example3Params {
    pub n_values: Vec<usize>,
    pub p_values: Vec<f64>,
    pub max_degree: usize,
}

impl Default for Example3Params {
    fn default() -> Self {
        Example3Params {
            n_values: vec![1, 5, 25, 100],
            p_values: vec![1.0, 2.0, 3.0],
            max_degree: 106,
        }
    }
}

/// `S_n` on degrees `0..=max_degree` and its restriction to the span of
/// `e_k`, `k ≥ n` (the monomials `z^d`, `d ≥ n−1`).
fn shift_and_restriction(n: usize, max_degree: usize) -> Result<(TruncatedOperator<f64>, TruncatedOperator<f64>)> {
    let basis = Arc::new(GradedBasis::enumerate(1, max_degree, 1)?);
    let w = WeightSet::<f64>::example3(basis, n)?;
    let s = coordinate_shift::<f64>(&w, 0)?;
    let sub = monomial_submodule::<f64>(&w, &[(MultiIndex::new(vec![(n - 1) as u32]), 0)])?;
    let y = s.restrict_to_submodule(&sub)?.operator;
    Ok((s, y))
}

fn closed_form(n: usize, p: f64) -> f64 {
    if p.is_infinite() {
        1.0 / n as f64
    } else {
        (n as f64).powf((1.0 - p) / p)
    }
}

fn paper_stated(n: usize, p: f64) -> f64 {
    if p.is_infinite() {
        if n == 1 {
            1.0
        } else {
            0.0
        }
    } else {
        (n as f64).powf(1.0 - p)
    }
}

pub fn run_example3(params: &Example3Params) -> Result<ExperimentReport> {
    precondition(!params.n_values.is_empty(), || "no n values".into())?;
    precondition(params.n_values.iter().all(|&n| n >= 1), || "n must be >= 1".into())?;
    check_p(&params.p_values)?;
    let top = *params.n_values.iter().max().expect("nonempty");
    precondition(params.max_degree > top + 5, || {
        format!("N = {} must exceed max(n) + 5 = {}", params.max_degree, top + 5)
    })?;

    let mut report = ExperimentReport::new("example3");
    report.param("n_values", list(&params.n_values));
    report.param("p_values", num_list(&params.p_values));
    report.param("max_degree", params.max_degree.to_string());

    let spectra: Vec<(usize, Vec<f64>, Vec<f64>, f64)> = params
        .n_values
        .par_iter()
        .map(|&n| {
            let (s, y) = shift_and_restriction(n, params.max_degree)?;
            let c = s.self_commutator();
            let sv = singular_values(&c, Window::Interior)?;
            let rsv = singular_values(&y.self_commutator(), Window::Interior)?;
            Ok((n, sv, rsv, trace(&c, Window::Interior)))
        })
        .collect::<Result<_>>()?;

    let mut table = Table::new(
        "example3",
        &[
            "n",
            "p",
            "computed",
            "derived",
            "discrepancy",
            "paper_stated",
            "paper_matches_computation",
            "restricted",
            "restricted_minus_one",
            "interior_trace",
        ],
    );
    let (mut worst, mut worst_restricted) = (0.0f64, 0.0f64);
    let mut paper_mismatch = 0;
    for (n, sv, rsv, tr) in &spectra {
        for &p in &params.p_values {
            let computed = schatten_from_values(sv, p)?;
            let derived = closed_form(*n, p);
            let paper = paper_stated(*n, p);
            let restricted = schatten_from_values(rsv, p)?;
            let matches = (computed - paper).abs() <= 1e-10;
            paper_mismatch += usize::from(!matches);
            worst = worst.max((computed - derived).abs());
            worst_restricted = worst_restricted.max((restricted - 1.0).abs());
            table.push(vec![
                n.to_string(),
                p_label(p),
                num(computed),
                num(derived),
                num(computed - derived),
                num(paper),
                matches.to_string(),
                num(restricted),
                num(restricted - 1.0),
                num(*tr),
            ]);
        }
    }
    report.tables.push(table);
    report.check(
        "commutator norm equals n^((1-p)/p)",
        worst <= 1e-10,
        false,
        format!("max |computed - derived| = {}", num(worst)),
    );
    report.check(
        "restricted commutator norm equals 1",
        worst_restricted <= 1e-12,
        false,
        format!("max |restricted - 1| = {}", num(worst_restricted)),
    );
    report.notes.push(format!(
        "paper_stated is n^(1-p); it disagrees with the computed norm in {paper_mismatch} of {} rows, \
         which follow n^((1-p)/p) instead",
        spectra.len() * params.p_values.len()
    ));
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CounterexampleParams {
    pub max_blocks: usize,
    pub p_values: Vec<f64>,
    pub thresholds: DiagnosticThresholds,
}

impl Default for CounterexampleParams {
    fn default() -> Self {
        CounterexampleParams {
            max_blocks: 64,
            p_values: vec![3.0],
            thresholds: DiagnosticThresholds::default(),
        }
    }
}

/// Degree bound used for the `b`-th block.
pub fn block_degree(b: usize) -> usize {
    b + 6
}

pub fn run_counterexample_direct_sum(params: &CounterexampleParams) -> Result<ExperimentReport> {
    precondition(params.max_blocks >= 8, || {
        format!("need at least 8 blocks, got {}", params.max_blocks)
    })?;
    check_p(&params.p_values)?;
    let mut report = ExperimentReport::new("counterexample");
    report.param("max_blocks", params.max_blocks.to_string());
    report.param("p_values", num_list(&params.p_values));
    report.param("block_degree", "b + 6");
    record_thresholds(&mut report, &params.thresholds);

    let blocks: Vec<(TruncatedOperator<f64>, TruncatedOperator<f64>)> = (1..=params.max_blocks)
        .into_par_iter()
        .map(|b| shift_and_restriction(b, block_degree(b)))
        .collect::<Result<_>>()?;

    let spectra: Vec<(Vec<f64>, Vec<f64>)> = (1..=params.max_blocks)
        .into_par_iter()
        .map(|count| {
            let (full, restricted): (Vec<_>, Vec<_>) = blocks[..count].iter().cloned().unzip();
            let c = direct_sum(&full)?.self_commutator();
            let rc = direct_sum(&restricted)?.self_commutator();
            Ok((
                singular_values(&c, Window::Interior)?,
                singular_values(&rc, Window::Interior)?,
            ))
        })
        .collect::<Result<_>>()?;

    let mut full_table = Table::new("full", &["B", "p", "value", "closed_form", "difference"]);
    let mut restricted_table = Table::new("restricted", &["B", "p", "value", "closed_form", "difference"]);
    let mut worst_restricted = 0.0f64;
    for &p in &params.p_values {
        let mut full_trend = Vec::new();
        let mut restricted_trend = Vec::new();
        for (i, (sv, rsv)) in spectra.iter().enumerate() {
            let count = i + 1;
            let full = schatten_from_values(sv, p)?;
            let full_closed = if p.is_infinite() {
                1.0
            } else {
                (1..=count).map(|b| (b as f64).powf(1.0 - p)).sum::<f64>().powf(1.0 / p)
            };
            let restricted = schatten_from_values(rsv, p)?;
            let restricted_closed = if p.is_infinite() { 1.0 } else { (count as f64).powf(1.0 / p) };
            worst_restricted = worst_restricted.max((restricted - restricted_closed).abs() / restricted_closed);
            full_table.push(vec![
                count.to_string(),
                p_label(p),
                num(full),
                num(full_closed),
                num(full - full_closed),
            ]);
            restricted_table.push(vec![
                count.to_string(),
                p_label(p),
                num(restricted),
                num(restricted_closed),
                num(restricted - restricted_closed),
            ]);
            full_trend.push((count, full));
            restricted_trend.push((count, restricted));
        }
        let label = p_label(p);
        report.verdict(
            format!("full p={label}"),
            convergence_diagnostic(&full_trend, &params.thresholds),
            &params.thresholds,
        );
        report.verdict(
            format!("restricted p={label}"),
            convergence_diagnostic(&restricted_trend, &params.thresholds),
            &params.thresholds,
        );
    }
    report.tables.push(full_table);
    report.tables.push(restricted_table);
    report.check(
        "restricted norm equals B^(1/p)",
        worst_restricted <= 1e-12,
        false,
        format!("max relative difference = {}", num(worst_restricted)),
    );
    Ok(report)
}
