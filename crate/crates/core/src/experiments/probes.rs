use nalgebra::Complex;
use rayon::prelude::*;

use super::report::{list, num, num_list, ExperimentReport, Table};
use super::{
    check_p, check_sweep, default_sweep, p_label, pairs, parse_all, precondition, record_thresholds, weights,
    ExperimentError, Result,
};
use crate::polynomial_syntax::format_generator;
use crate::schatten_analysis::{
    convergence_diagnostic, resolved_decay_fit, schatten_from_values, singular_values, DecayFit,
    DiagnosticThresholds, Window,
};
use crate::shift_operators::{coordinate_shift, cross_commutator, TruncatedOperator};
use crate::submodule_builder::{homogeneous_submodule, polynomial_submodule, Side};
use crate::weight_models::WeightFamily;

/// Critical Schatten exponent of `[Z_i*, Z_j]`, fitted on the part of the
/// interior spectrum at degree `n` that agrees with degree `reference`.
pub fn critical_exponent(
    family: &WeightFamily,
    m: usize,
    (i, j): (usize, usize),
    n: usize,
    reference: usize,
    rel_tol: f64,
    tail_fraction: f64,
) -> Result<Option<DecayFit>> {
    precondition(reference < n, || format!("reference degree {reference} must be below {n}"))?;
    let spectrum = |deg: usize| -> Result<Vec<f64>> {
        let w = weights(family, m, deg, 1)?;
        Ok(singular_values(&cross_commutator::<f64>(&w, i, j)?, Window::Interior)?)
    };
    let (fine, coarse) = rayon::join(|| spectrum(n), || spectrum(reference));
    Ok(resolved_decay_fit(&fine?, &coarse?, rel_tol, tail_fraction))
}

fn commutator_spectrum<S: crate::scalar::Scalar>(
    ops: &[TruncatedOperator<S>],
    i: usize,
    j: usize,
    window: Window,
) -> Result<Vec<f64>> {
    let c = ops[i].adjoint().commutator(&ops[j])?;
    Ok(singular_values(&c, window)?.iter().map(|s| crate::scalar::Real::to_f64_lossy(*s)).collect())
}

/// One row per (side, operator) series.
struct Series {
    side: &'static str,
    operator: String,
    window: Window,
    spectra: Vec<Vec<f64>>,
}

fn push_norm_rows(
    report: &mut ExperimentReport,
    table: &mut Table,
    series: &[Series],
    sweep: &[usize],
    p_values: &[f64],
    thresholds: &DiagnosticThresholds,
) -> Result<()> {
    for s in series {
        for &p in p_values {
            let mut trend = Vec::with_capacity(sweep.len());
            for (&n, sv) in sweep.iter().zip(&s.spectra) {
                let v = schatten_from_values(sv, p)?;
                trend.push((n, v));
                table.push(vec![
                    s.side.into(),
                    s.operator.clone(),
                    p_label(p),
                    n.to_string(),
                    num(v),
                    format!("{:?}", s.window).to_uppercase(),
                ]);
            }
            report.verdict(
                format!("{} {} p={}", s.side, s.operator, p_label(p)),
                convergence_diagnostic(&trend, thresholds),
                thresholds,
            );
        }
    }
    Ok(())
}

fn fit_table(series: &[Series], sweep: &[usize], rel_tol: f64, tail_fraction: f64) -> (Table, Vec<Option<DecayFit>>) {
    let mut table = Table::new(
        "fits",
        &[
            "side",
            "operator",
            "N",
            "reference_N",
            "resolved",
            "beta",
            "critical_exponent",
            "residual",
            "status",
        ],
    );
    let mut fits = Vec::new();
    for s in series {
        let fit = if s.spectra.len() >= 2 {
            let k = s.spectra.len();
            resolved_decay_fit(&s.spectra[k - 1], &s.spectra[k - 2], rel_tol, tail_fraction)
        } else {
            None
        };
        let (n, reference) = match sweep.len() {
            0 | 1 => ("-".to_string(), "-".to_string()),
            k => (sweep[k - 1].to_string(), sweep[k - 2].to_string()),
        };
        let row = match &fit {
            Some(f) => vec![
                f.resolved.map(|r| r.to_string()).unwrap_or_default(),
                num(f.beta),
                num(f.critical_exponent),
                num(f.residual),
                "FITTED".into(),
            ],
            None => {
                let zero = s.spectra.last().is_some_and(|sv| sv.first().is_none_or(|&v| v == 0.0));
                let status = if zero { "ZERO" } else { "INCONCLUSIVE" };
                vec!["-".into(), "-".into(), "-".into(), "-".into(), status.into()]
            }
        };
        let mut full = vec![s.side.to_string(), s.operator.clone(), n, reference];
        full.extend(row);
        table.push(full);
        fits.push(fit);
    }
    (table, fits)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArvesonProbeParams {
    pub family: WeightFamily,
    pub m: usize,
    pub k: usize,
    pub generators: Vec<String>,
    pub p_values: Vec<f64>,
    pub degree_sweep: Vec<usize>,
    pub thresholds: DiagnosticThresholds,
    pub fit_tolerance: f64,
    pub tail_fraction: f64,
}

impl Default for ArvesonProbeParams {
    fn default() -> Self {
        ArvesonProbeParams {
            family: WeightFamily::DruryArveson,
            m: 2,
            k: 1,
            generators: vec!["z1*z2".into()],
            p_values: vec![3.0],
            degree_sweep: default_sweep(2),
            thresholds: DiagnosticThresholds::default(),
            fit_tolerance: 1e-8,
            tail_fraction: 0.5,
        }
    }
}

pub fn run_arveson_probe(params: &ArvesonProbeParams) -> Result<ExperimentReport> {
    let (m, k) = (params.m, params.k);
    precondition(m >= 1 && k >= 1, || "m and k must be >= 1".into())?;
    precondition(!params.generators.is_empty(), || "no generators".into())?;
    check_p(&params.p_values)?;
    check_sweep(&params.degree_sweep)?;
    let gens = parse_all(&params.generators, m, k)?;
    if let Some(i) = gens.iter().position(|g| g.homogeneous_degree().is_none()) {
        return Err(ExperimentError::Precondition(format!(
            "generator `{}` is not homogeneous",
            params.generators[i]
        )));
    }

    let mut report = ExperimentReport::new("arveson-probe");
    report.param("family", params.family.id());
    report.param("m", m.to_string());
    report.param("k", k.to_string());
    report.param("generators", gens.iter().map(format_generator).collect::<Vec<_>>().join("; "));
    report.param("p_values", num_list(&params.p_values));
    report.param("degree_sweep", list(&params.degree_sweep));
    report.param("fit_tolerance", num(params.fit_tolerance));
    report.param("tail_fraction", num(params.tail_fraction));
    record_thresholds(&mut report, &params.thresholds);

    let ij = pairs(m);
    // per degree: ambient, submodule and quotient pair spectra, then the
    // mixed operator, then (dim S, dim S⊥, invariance residual)
    let cells: Vec<(Vec<Vec<f64>>, [f64; 3])> = params
        .degree_sweep
        .par_iter()
        .map(|&n| {
            let w = weights(&params.family, m, n, k)?;
            let sub = homogeneous_submodule(&w, &gens)?;
            let complement = sub.projection(Side::Complement);
            let z: Vec<TruncatedOperator<f64>> =
                (0..m).map(|i| coordinate_shift::<f64>(&w, i)).collect::<std::result::Result<_, _>>()?;
            let mut residual = 0.0f64;
            let mut y = Vec::with_capacity(m);
            for zi in &z {
                let r = zi.restrict_to_submodule(&sub)?;
                residual = residual.max(r.residual);
                y.push(r.operator);
            }
            let x: Vec<TruncatedOperator<f64>> = z
                .iter()
                .map(|zi| zi.compress_to_range(&complement))
                .collect::<std::result::Result<_, _>>()?;
            let mut spectra = Vec::new();
            for ops in [&z, &y, &x] {
                for &(i, j) in &ij {
                    spectra.push(commutator_spectrum(ops, i, j, Window::Interior)?);
                }
            }
            if m >= 2 {
                let mixed = y[0]
                    .to_complex()
                    .add(&y[1].to_complex().scale(Complex::new(0.0, 1.0)))?;
                spectra.push(
                    singular_values(&mixed.self_commutator(), Window::Interior)?
                        .into_iter()
                        .collect(),
                );
            }
            let dims = [
                sub.dimension(Side::Submodule) as f64,
                sub.dimension(Side::Complement) as f64,
                residual,
            ];
            Ok((spectra, dims))
        })
        .collect::<Result<_>>()?;

    let mut series = Vec::new();
    let mut idx = 0;
    for (side, letter) in [("ambient", "Z"), ("submodule", "Y"), ("quotient", "X")] {
        for &(i, j) in &ij {
            series.push(Series {
                side,
                operator: format!("[{letter}{}*,{letter}{}]", i + 1, j + 1),
                window: Window::Interior,
                spectra: cells.iter().map(|c| c.0[idx].clone()).collect(),
            });
            idx += 1;
        }
    }
    if m >= 2 {
        series.push(Series {
            side: "submodule",
            operator: "[T*,T] T=Y1+iY2".into(),
            window: Window::Interior,
            spectra: cells.iter().map(|c| c.0[idx].clone()).collect(),
        });
    }

    let mut dims = Table::new("dimensions", &["N", "dim_submodule", "dim_quotient", "invariance_residual"]);
    for (&n, c) in params.degree_sweep.iter().zip(&cells) {
        dims.push(vec![n.to_string(), num(c.1[0]), num(c.1[1]), num(c.1[2])]);
    }
    let mut norms = Table::new("norms", &["side", "operator", "p", "N", "value", "window"]);
    push_norm_rows(
        &mut report,
        &mut norms,
        &series,
        &params.degree_sweep,
        &params.p_values,
        &params.thresholds,
    )?;
    let (fits, _) = fit_table(&series, &params.degree_sweep, params.fit_tolerance, params.tail_fraction);
    report.tables.push(dims);
    report.tables.push(norms);
    report.tables.push(fits);
    report
        .notes
        .push("verdicts are empirical statements about finite truncations, not proofs".into());
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuotientProbeParams {
    pub family: WeightFamily,
    pub m: usize,
    pub generators: Vec<String>,
    pub p_values: Vec<f64>,
    pub degree_sweep: Vec<usize>,
    pub zero_variety_dimension: Option<f64>,
    pub thresholds: DiagnosticThresholds,
    pub fit_tolerance: f64,
    pub tail_fraction: f64,
}

impl Default for QuotientProbeParams {
    fn default() -> Self {
        QuotientProbeParams {
            family: WeightFamily::BergmanBall,
            m: 2,
            generators: vec!["z1".into()],
            p_values: vec![1.0, 2.0, 3.0],
            degree_sweep: default_sweep(2),
            zero_variety_dimension: None,
            thresholds: DiagnosticThresholds::default(),
            fit_tolerance: 1e-8,
            tail_fraction: 0.5,
        }
    }
}

pub fn run_quotient_smoothness_probe(params: &QuotientProbeParams) -> Result<ExperimentReport> {
    let m = params.m;
    precondition(m == 2 || m == 3, || format!("m must be 2 or 3, got {m}"))?;
    precondition(!params.generators.is_empty(), || "no generators".into())?;
    check_p(&params.p_values)?;
    check_sweep(&params.degree_sweep)?;
    let gens = parse_all(&params.generators, m, 1)?;
    let graded = gens.iter().all(|g| g.homogeneous_degree().is_some());
    let window = if graded { Window::Interior } else { Window::Full };

    let mut report = ExperimentReport::new("quotient-probe");
    report.param("family", params.family.id());
    report.param("m", m.to_string());
    report.param("generators", gens.iter().map(format_generator).collect::<Vec<_>>().join("; "));
    report.param("p_values", num_list(&params.p_values));
    report.param("degree_sweep", list(&params.degree_sweep));
    report.param(
        "zero_variety_dimension (as supplied)",
        params.zero_variety_dimension.map(num).unwrap_or_else(|| "not supplied".into()),
    );
    report.param("fit_tolerance", num(params.fit_tolerance));
    report.param("tail_fraction", num(params.tail_fraction));
    report.param("window", format!("{window:?}").to_uppercase());
    record_thresholds(&mut report, &params.thresholds);

    let ij = pairs(m);
    let cells: Vec<(Vec<Vec<f64>>, usize)> = params
        .degree_sweep
        .par_iter()
        .map(|&n| {
            let w = weights(&params.family, m, n, 1)?;
            let sub = polynomial_submodule(&w, &gens)?;
            let complement = sub.projection(Side::Complement);
            let x: Vec<TruncatedOperator<f64>> = (0..m)
                .map(|i| Ok(coordinate_shift::<f64>(&w, i)?.compress_to_range(&complement)?))
                .collect::<Result<_>>()?;
            let spectra = ij
                .iter()
                .map(|&(i, j)| commutator_spectrum(&x, i, j, window))
                .collect::<Result<_>>()?;
            Ok((spectra, complement.rank()))
        })
        .collect::<Result<_>>()?;

    let series: Vec<Series> = ij
        .iter()
        .enumerate()
        .map(|(idx, &(i, j))| Series {
            side: "quotient",
            operator: format!("[X{}*,X{}]", i + 1, j + 1),
            window,
            spectra: cells.iter().map(|c| c.0[idx].clone()).collect(),
        })
        .collect();

    let mut dims = Table::new("dimensions", &["N", "dim_quotient"]);
    for (&n, c) in params.degree_sweep.iter().zip(&cells) {
        dims.push(vec![n.to_string(), c.1.to_string()]);
    }
    let mut norms = Table::new("norms", &["side", "operator", "p", "N", "value", "window"]);
    push_norm_rows(
        &mut report,
        &mut norms,
        &series,
        &params.degree_sweep,
        &params.p_values,
        &params.thresholds,
    )?;
    let (fits, fitted) = fit_table(&series, &params.degree_sweep, params.fit_tolerance, params.tail_fraction);
    let estimate = fitted
        .iter()
        .flatten()
        .map(|f| f.critical_exponent)
        .fold(None, |m: Option<f64>, c| Some(m.map_or(c, |m| m.max(c))));
    let mut summary = Table::new("critical_exponent", &["estimate", "zero_variety_dimension_as_supplied"]);
    summary.push(vec![
        estimate.map(num).unwrap_or_else(|| "INCONCLUSIVE".into()),
        params.zero_variety_dimension.map(num).unwrap_or_else(|| "-".into()),
    ]);
    report.tables.push(dims);
    report.tables.push(norms);
    report.tables.push(fits);
    report.tables.push(summary);
    if !graded {
        report.notes.push(
            "non-homogeneous generators give an ungraded quotient; norms use the full truncated window, \
             which includes truncation artifacts"
                .into(),
        );
    }
    report.notes.push(
        "the critical exponent is the largest fitted over all commutator pairs; it is exploratory data".into(),
    );
    Ok(report)
}
