//! Singular values, Schatten norms, traces, the `A_p` witness, power-law
//! fits of singular-value decay, and convergence verdicts for sequences of
//! truncated quantities.
//!
//! Spectra are computed per connected component of the sparsity pattern, so
//! weighted shifts and their commutators (which are block diagonal after a
//! permutation) never need one dense SVD of the whole truncation.

use nalgebra::DMatrix;
use nalgebra_sparse::CscMatrix;
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use num_traits::Zero;

use crate::scalar::{Real, Scalar};
use crate::shift_operators::TruncatedOperator;

/// Largest connected component handled by dense factorization.
pub const DENSE_COMPONENT_LIMIT: usize = 5000;
pub const SELF_ADJOINT_TOLERANCE: f64 = 1e-10;
/// Values below this fraction of the largest singular value count as zero
/// when fitting decay.
pub const ZERO_FRACTION: f64 = 1e-13;
pub const MIN_TAIL_VALUES: usize = 12;

#[derive(Debug, Error)]
pub enum SchattenError {
    #[error("operator has non-finite entries")]
    NonFinite,
    #[error("Schatten exponent must be >= 1 or infinite, got {0}")]
    InvalidExponent(f64),
    #[error("connected block of size {size} exceeds the dense limit {limit}")]
    ComponentTooLarge { size: usize, limit: usize },
    #[error("operator is not self-adjoint (residual {0:e})")]
    NotSelfAdjoint(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Window {
    Full,
    Interior,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Converging,
    Diverging,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Converging => "CONVERGING",
            Verdict::Diverging => "DIVERGING",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

fn window_indices<S: Scalar>(op: &TruncatedOperator<S>, window: Window) -> Vec<usize> {
    match window {
        Window::Full => (0..op.dimension()).collect(),
        Window::Interior => op.interior_indices(),
    }
}

/// Principal submatrix on `indices` (sorted).
fn principal<S: Scalar>(m: &CscMatrix<S>, indices: &[usize]) -> CscMatrix<S> {
    if indices.len() == m.ncols() {
        return m.clone();
    }
    let mut map = vec![usize::MAX; m.ncols()];
    for (new, &old) in indices.iter().enumerate() {
        map[old] = new;
    }
    let mut offsets = Vec::with_capacity(indices.len() + 1);
    let mut rows = Vec::new();
    let mut vals = Vec::new();
    offsets.push(0);
    for &old in indices {
        let col = m.col(old);
        for (&r, &v) in col.row_indices().iter().zip(col.values()) {
            if map[r] != usize::MAX {
                rows.push(map[r]);
                vals.push(v);
            }
        }
        offsets.push(rows.len());
    }
    CscMatrix::try_from_csc_data(indices.len(), indices.len(), offsets, rows, vals)
        .expect("row order is preserved by an increasing map")
}

/// Groups of indices such that the matrix is block diagonal under the
/// induced permutation.
fn components<S: Scalar>(m: &CscMatrix<S>) -> Vec<Vec<usize>> {
    let n = m.ncols();
    let mut uf = UnionFind::<usize>::new(n);
    for (r, c, _) in m.triplet_iter() {
        uf.union(r, c);
    }
    let labels = uf.into_labeling();
    let mut slot = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        if slot[l] == usize::MAX {
            slot[l] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[l]].push(i);
    }
    groups
}

fn dense_block<S: Scalar>(m: &CscMatrix<S>, idx: &[usize]) -> DMatrix<S> {
    let mut map = vec![usize::MAX; m.ncols()];
    for (new, &old) in idx.iter().enumerate() {
        map[old] = new;
    }
    let mut d = DMatrix::zeros(idx.len(), idx.len());
    for (j, &old) in idx.iter().enumerate() {
        let col = m.col(old);
        for (&r, &v) in col.row_indices().iter().zip(col.values()) {
            d[(map[r], j)] = v;
        }
    }
    d
}

fn check_finite<S: Scalar>(m: &CscMatrix<S>) -> Result<(), SchattenError> {
    if m.values().iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SchattenError::NonFinite)
    }
}

fn sort_descending<R: Real>(v: &mut [R]) {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
}

/// Singular values of a square sparse matrix, descending, one per row.
pub fn matrix_singular_values<S: Scalar>(m: &CscMatrix<S>) -> Result<Vec<S::RealField>, SchattenError> {
    check_finite(m)?;
    let groups = components(m);
    if let Some(big) = groups.iter().find(|g| g.len() > DENSE_COMPONENT_LIMIT) {
        return Err(SchattenError::ComponentTooLarge {
            size: big.len(),
            limit: DENSE_COMPONENT_LIMIT,
        });
    }
    let parts: Vec<Vec<S::RealField>> = groups
        .par_iter()
        .map(|g| {
            if g.len() == 1 {
                let i = g[0];
                let v = m.get_entry(i, i).map(|e| e.into_value()).unwrap_or_else(S::zero);
                vec![v.modulus()]
            } else {
                dense_block(m, g).singular_values().iter().copied().collect()
            }
        })
        .collect();
    let mut out: Vec<S::RealField> = parts.into_iter().flatten().collect();
    sort_descending(&mut out);
    Ok(out)
}

/// Singular values of the windowed operator, descending; length equals the
/// window dimension.
pub fn singular_values<S: Scalar>(op: &TruncatedOperator<S>, window: Window) -> Result<Vec<S::RealField>, SchattenError> {
    let idx = window_indices(op, window);
    matrix_singular_values(&principal(op.matrix(), &idx))
}

/// `(Σ σ^p)^{1/p}` of a descending list; `p = ∞` gives the largest value.
pub fn schatten_from_values<R: Real>(sigma: &[R], p: f64) -> Result<R, SchattenError> {
    if !(p >= 1.0) {
        return Err(SchattenError::InvalidExponent(p));
    }
    let top = sigma.iter().copied().fold(R::zero(), |a, b| a.max(b));
    if p.is_infinite() || top == R::zero() {
        return Ok(top);
    }
    let pr = R::of(p);
    let sum = sigma.iter().fold(R::zero(), |acc, &s| acc + (s / top).powf(pr));
    Ok(top * sum.powf(R::one() / pr))
}

pub fn schatten_norm<S: Scalar>(op: &TruncatedOperator<S>, p: f64, window: Window) -> Result<S::RealField, SchattenError> {
    if !(p >= 1.0) {
        return Err(SchattenError::InvalidExponent(p));
    }
    schatten_from_values(&singular_values(op, window)?, p)
}

/// Sum of the diagonal entries inside the window.
pub fn trace<S: Scalar>(op: &TruncatedOperator<S>, window: Window) -> S {
    let m = op.matrix();
    window_indices(op, window)
        .into_iter()
        .filter_map(|i| m.get_entry(i, i).map(|e| e.into_value()))
        .fold(S::zero(), |a, b| a + b)
}

/// Spectral split `A = P + C` of a self-adjoint `A`, with `P ≥ 0` the
/// positive part and `C ≤ 0` the negative part.
#[derive(Clone, Debug)]
pub struct ApWitness<S: Scalar> {
    pub positive_part: DMatrix<S>,
    pub compact_part: DMatrix<S>,
    pub p: f64,
    pub p_norm_of_c: f64,
    pub trace_of_positive: f64,
    pub trace_norm_of_c: f64,
    pub eigenvalues: Vec<f64>,
}

pub fn ap_witness<S: Scalar>(self_commutator: &TruncatedOperator<S>, p: f64) -> Result<ApWitness<S>, SchattenError> {
    if !(p >= 1.0) {
        return Err(SchattenError::InvalidExponent(p));
    }
    let m = self_commutator.matrix();
    check_finite(m)?;
    let scale = m.values().iter().fold(1.0f64, |a, v| a.max(v.modulus().to_f64_lossy()));
    let mut asym = 0.0f64;
    for (r, c, v) in m.triplet_iter() {
        let mirror = m.get_entry(c, r).map(|e| e.into_value()).unwrap_or_else(S::zero);
        asym = asym.max((*v - mirror.conjugate()).modulus().to_f64_lossy());
    }
    if asym > SELF_ADJOINT_TOLERANCE * scale {
        return Err(SchattenError::NotSelfAdjoint(asym));
    }

    let n = m.ncols();
    let groups = components(m);
    if let Some(big) = groups.iter().find(|g| g.len() > DENSE_COMPONENT_LIMIT) {
        return Err(SchattenError::ComponentTooLarge {
            size: big.len(),
            limit: DENSE_COMPONENT_LIMIT,
        });
    }
    let mut positive = DMatrix::zeros(n, n);
    let mut negative = DMatrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for g in &groups {
        let block = dense_block(m, g);
        let block = (&block + block.adjoint()).unscale(S::RealField::of(2.0));
        let eig = block.symmetric_eigen();
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            eigenvalues.push(lambda.to_f64_lossy());
            if lambda == S::RealField::zero() {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            let target = if lambda > S::RealField::zero() { &mut positive } else { &mut negative };
            for (a, &ia) in g.iter().enumerate() {
                for (b, &ib) in g.iter().enumerate() {
                    target[(ia, ib)] += S::from_real(lambda) * v[a] * v[b].conjugate();
                }
            }
        }
    }
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let negatives: Vec<f64> = eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).collect();
    Ok(ApWitness {
        positive_part: positive,
        compact_part: negative,
        p,
        p_norm_of_c: schatten_from_values(&negatives, p)?,
        trace_of_positive: eigenvalues.iter().filter(|&&l| l > 0.0).sum(),
        trace_norm_of_c: negatives.iter().sum(),
        eigenvalues,
    })
}

/// Least-squares power law `σ_k ≈ c·k^{-β}` over a tail window.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DecayFit {
    pub beta: f64,
    pub residual: f64,
    pub critical_exponent: f64,
    /// 1-based rank of the first fitted value.
    pub tail_start: usize,
    pub tail_len: usize,
    pub tail_fraction: f64,
    /// Length of the prefix trusted as converged, when one was used.
    pub resolved: Option<usize>,
}

/// Fit over the last `tail_fraction` of the positive values. `None` when
/// fewer than [`MIN_TAIL_VALUES`] values fall in the tail.
pub fn decay_exponent_fit(sigma: &[f64], tail_fraction: f64) -> Option<DecayFit> {
    let top = sigma.iter().copied().fold(0.0f64, f64::max);
    if !(top > 0.0) || !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return None;
    }
    let positive = sigma.iter().take_while(|&&s| s > top * ZERO_FRACTION).count();
    let tail_len = (tail_fraction * positive as f64).round() as usize;
    if tail_len < MIN_TAIL_VALUES {
        return None;
    }
    let start = positive - tail_len;
    let xs: Vec<f64> = (start..positive).map(|k| ((k + 1) as f64).ln()).collect();
    let ys: Vec<f64> = sigma[start..positive].iter().map(|s| s.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let beta = -slope;
    Some(DecayFit {
        beta,
        residual: (rss / tail_len as f64).sqrt(),
        critical_exponent: 1.0 / beta,
        tail_start: start + 1,
        tail_len,
        tail_fraction,
        resolved: None,
    })
}

/// Number of leading values on which two descending spectra of nested
/// truncations agree to `rel_tol`.
pub fn resolved_prefix(fine: &[f64], coarse: &[f64], rel_tol: f64) -> usize {
    fine.iter()
        .zip(coarse)
        .take_while(|(a, b)| (*a - *b).abs() <= rel_tol * a.abs().max(b.abs()) && **a > 0.0)
        .count()
}

/// Decay fit restricted to the part of the spectrum that no longer moves
/// between a coarse and a fine truncation.
pub fn resolved_decay_fit(fine: &[f64], coarse: &[f64], rel_tol: f64, tail_fraction: f64) -> Option<DecayFit> {
    let k = resolved_prefix(fine, coarse, rel_tol);
    let mut fit = decay_exponent_fit(&fine[..k], tail_fraction)?;
    fit.resolved = Some(k);
    Some(fit)
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Thresholds of [`convergence_diagnostic`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagnosticThresholds {
    /// Relative increments below this over the last quarter mean a plateau.
    pub plateau: f64,
    /// Increments decaying at least like `N^{-s}` with `s` this large converge.
    pub converging_exponent: f64,
    /// Increments decaying no faster than this exponent may diverge.
    pub diverging_exponent: f64,
    /// Divergence also needs growth by this factor over the observed range.
    pub growth_factor: f64,
}

impl Default for DiagnosticThresholds {
    fn default() -> Self {
        DiagnosticThresholds {
            plateau: 1e-3,
            converging_exponent: 1.2,
            diverging_exponent: 0.8,
            growth_factor: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnosis {
    pub verdict: Verdict,
    /// Fitted decay exponent of the per-unit increments.
    pub increment_exponent: Option<f64>,
    pub last_relative_increment: Option<f64>,
    pub growth: Option<f64>,
    pub reason: String,
}

impl Diagnosis {
    fn inconclusive(reason: &str) -> Self {
        Diagnosis {
            verdict: Verdict::Inconclusive,
            increment_exponent: None,
            last_relative_increment: None,
            growth: None,
            reason: reason.into(),
        }
    }
}

/// Classify a sequence `(N, value)` with increasing `N`.
///
/// A plateau (all relative increments in the last quarter below
/// `plateau`) converges. Otherwise the per-unit increments over the trailing
/// half are fitted to `N^{-s}`: `s ≥ converging_exponent` converges, and
/// `s ≤ diverging_exponent` together with `|last/first| ≥ growth_factor`
/// diverges. Anything else is inconclusive.
pub fn convergence_diagnostic(values: &[(usize, f64)], thresholds: &DiagnosticThresholds) -> Diagnosis {
    if values.len() < 4 {
        return Diagnosis::inconclusive("fewer than 4 points");
    }
    if values.iter().any(|v| !v.1.is_finite()) {
        return Diagnosis::inconclusive("non-finite value");
    }
    if values.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Diagnosis::inconclusive("degrees not increasing");
    }
    let steps = values.len() - 1;
    let relative: Vec<f64> = values
        .windows(2)
        .map(|w| {
            let d = (w[1].1 - w[0].1).abs();
            let s = w[1].1.abs().max(w[0].1.abs());
            if s == 0.0 {
                0.0
            } else {
                d / s
            }
        })
        .collect();
    let quarter = (steps / 4).max(1);
    let last_relative = relative[steps - 1];
    let first = values[0].1.abs();
    let growth = if first > 0.0 {
        Some(values[steps].1.abs() / first)
    } else {
        None
    };
    if relative[steps - quarter..].iter().all(|&r| r < thresholds.plateau) {
        return Diagnosis {
            verdict: Verdict::Converging,
            increment_exponent: None,
            last_relative_increment: Some(last_relative),
            growth,
            reason: "plateau".into(),
        };
    }

    let half = steps.div_ceil(2).max(3).min(steps);
    let mut xs = Vec::with_capacity(half);
    let mut ys = Vec::with_capacity(half);
    for w in values[values.len() - 1 - half..].windows(2) {
        let (x0, x1) = (w[0].0 as f64, w[1].0 as f64);
        let d = (w[1].1 - w[0].1).abs() / (x1 - x0);
        if d > 0.0 && x0 > 0.0 {
            xs.push((0.5 * (x0 + x1)).ln());
            ys.push(d.ln());
        }
    }
    if xs.len() < 3 {
        return Diagnosis {
            growth,
            last_relative_increment: Some(last_relative),
            ..Diagnosis::inconclusive("fewer than 3 usable increments")
        };
    }
    let (slope, _) = least_squares(&xs, &ys);
    let s = -slope;
    let verdict = if s >= thresholds.converging_exponent {
        Verdict::Converging
    } else if s <= thresholds.diverging_exponent && growth.is_some_and(|g| g >= thresholds.growth_factor) {
        Verdict::Diverging
    } else {
        Verdict::Inconclusive
    };
    Diagnosis {
        verdict,
        increment_exponent: Some(s),
        last_relative_increment: Some(last_relative),
        growth,
        reason: "increment decay".into(),
    }
}

/// Norm values across truncation degrees, with an optional decay fit.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SchattenEstimate {
    pub p: f64,
    pub values_by_degree: Vec<(usize, f64)>,
    pub fitted_decay: Option<DecayFit>,
    pub critical_exponent_estimate: Option<f64>,
    pub verdict: Verdict,
    pub diagnosis: Diagnosis,
    pub thresholds: DiagnosticThresholds,
}

impl SchattenEstimate {
    pub fn new(
        p: f64,
        values_by_degree: Vec<(usize, f64)>,
        fitted_decay: Option<DecayFit>,
        thresholds: &DiagnosticThresholds,
    ) -> Self {
        let diagnosis = convergence_diagnostic(&values_by_degree, thresholds);
        SchattenEstimate {
            p,
            critical_exponent_estimate: fitted_decay.as_ref().map(|f| f.critical_exponent),
            values_by_degree,
            fitted_decay,
            verdict: diagnosis.verdict,
            diagnosis,
            thresholds: thresholds.clone(),
        }
    }
}
