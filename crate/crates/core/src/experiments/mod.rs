//! Parameterized reproductions and probes. Every runner returns an
//! [`ExperimentReport`]; none of them touches the filesystem.

use std::sync::Arc;

use thiserror::Error;

use crate::graded_basis::{BasisError, GradedBasis};
use crate::polynomial_syntax::{parse_generator, ParseError};
use crate::schatten_analysis::{DiagnosticThresholds, SchattenError, Verdict};
use crate::shift_operators::OperatorError;
use crate::submodule_builder::{PolynomialGenerator, SubmoduleError};
use crate::weight_models::{WeightError, WeightFamily, WeightSet};

mod berger_shaw;
mod example3;
mod example5;
mod lemma1;
mod probes;
pub mod report;

pub use berger_shaw::{
    run_berger_shaw_check, run_berger_shaw_random, BergerShawParams, BergerShawRandomParams, SourceSpec,
    BERGER_SHAW_TOLERANCE,
};
pub use example3::{run_counterexample_direct_sum, run_example3, CounterexampleParams, Example3Params};
pub use example5::{run_example5, Example5Params};
pub use lemma1::{run_lemma1_check, Lemma1Params, LEMMA1_TOLERANCE};
pub use probes::{
    critical_exponent, run_arveson_probe, run_quotient_smoothness_probe, ArvesonProbeParams, QuotientProbeParams,
};
pub use report::{Check, ExperimentReport, Table, VerdictRecord};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Submodule(#[from] SubmoduleError),
    #[error(transparent)]
    Spectrum(#[from] SchattenError),
    #[error("generator `{text}`: {source}")]
    Parse {
        text: String,
        #[source]
        source: ParseError,
    },
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

pub(crate) fn precondition(ok: bool, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(ExperimentError::Precondition(message()))
    }
}

/// Degree sweep used when none is given.
pub fn default_sweep(m: usize) -> Vec<usize> {
    match m {
        0..=2 => vec![8, 12, 16, 20, 28, 40],
        3 => vec![6, 9, 12, 16, 20],
        _ => vec![4, 6, 8, 10],
    }
}

pub(crate) fn weights(family: &WeightFamily, m: usize, n: usize, k: usize) -> Result<WeightSet<f64>> {
    let basis = Arc::new(GradedBasis::enumerate(m, n, k)?);
    Ok(WeightSet::build(basis, family.clone())?)
}

pub(crate) fn parse_all(texts: &[String], m: usize, k: usize) -> Result<Vec<PolynomialGenerator<f64>>> {
    texts
        .iter()
        .map(|t| {
            parse_generator(t, m, k).map_err(|source| ExperimentError::Parse {
                text: t.clone(),
                source,
            })
        })
        .collect()
}

pub(crate) fn check_sweep(sweep: &[usize]) -> Result<()> {
    precondition(!sweep.is_empty(), || "degree sweep is empty".into())?;
    precondition(sweep.windows(2).all(|w| w[0] < w[1]), || {
        "degree sweep must be strictly increasing".into()
    })
}

pub(crate) fn check_p(p_values: &[f64]) -> Result<()> {
    precondition(!p_values.is_empty(), || "no p values".into())?;
    match p_values.iter().find(|p| !(**p >= 1.0)) {
        Some(p) => Err(ExperimentError::Precondition(format!("p must be >= 1, got {p}"))),
        None => Ok(()),
    }
}

pub(crate) fn record_thresholds(report: &mut ExperimentReport, t: &DiagnosticThresholds) {
    report.param("thresholds.plateau", report::num(t.plateau));
    report.param("thresholds.converging_exponent", report::num(t.converging_exponent));
    report.param("thresholds.diverging_exponent", report::num(t.diverging_exponent));
    report.param("thresholds.growth_factor", report::num(t.growth_factor));
}

pub(crate) fn p_label(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        report::num(p)
    }
}

/// All pairs `i ≤ j`.
pub(crate) fn pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect()
}

/// Converging only if every part converges; diverging if any part does.
pub fn combine_verdicts(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut all_converging = true;
    for v in verdicts {
        match v {
            Verdict::Diverging => return Verdict::Diverging,
            Verdict::Inconclusive => all_converging = false,
            Verdict::Converging => {}
        }
    }
    if all_converging {
        Verdict::Converging
    } else {
        Verdict::Inconclusive
    }
}
