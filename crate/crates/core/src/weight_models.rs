//! Weight sets `Λ = {λ_α}` and the module conditions they satisfy.
//!
//! `λ_α` is the norm of the monomial `z^α`; in the orthonormal basis
//! `e_α = z^α / λ_α` the coordinate multiplier `Z_i` sends `e_α` to
//! `(λ_{α+e_i} / λ_α) e_{α+e_i}`. Everything is stored as `ln λ_α` so that
//! factorial-type weights never overflow or underflow.

use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::graded_basis::{BasisError, GradedBasis, MultiIndex};
use crate::scalar::Real;
use crate::schatten_analysis::{convergence_diagnostic, DiagnosticThresholds, SchattenError, Verdict, Window};
use crate::shift_operators::{cross_commutator, OperatorError};

#[derive(Debug, Error)]
pub enum WeightError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("invalid weight parameter: {0}")]
    InvalidParameter(String),
    #[error("log-weight of {index} is not finite")]
    NonFinite { index: MultiIndex },
    #[error("expected {expected} log-weights, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("requested truncation degree {requested} exceeds the weight set's degree {available}")]
    DegreeBeyondBasis { requested: usize, available: usize },
    #[error("malformed weight table line {line}: {reason}")]
    Table { line: usize, reason: String },
    #[error(transparent)]
    Operator(#[from] Box<OperatorError>),
    #[error(transparent)]
    Spectrum(#[from] SchattenError),
}

impl From<OperatorError> for WeightError {
    fn from(e: OperatorError) -> Self {
        WeightError::Operator(Box::new(e))
    }
}

/// Built-in weight families.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightFamily {
    /// `λ_α = 1`: the plain multivariable shift on `ℓ²(N^m)`.
    Constant,
    /// Symmetric Fock space `H²_m`: `λ_α² = α! / |α|!`.
    DruryArveson,
    /// Bergman space of the ball, normalized volume: `λ_α² = α! m! / (|α|+m)!`.
    BergmanBall,
    /// Hardy space of the sphere, normalized surface measure:
    /// `λ_α² = α! (m−1)! / (|α|+m−1)!`.
    HardyBall,
    /// `λ_α = ((1+|α|)!)^{−δ}`.
    FactorialDelta { delta: f64 },
    /// One-variable shift with weights `sqrt(k/n)` on `e_k`, `k ≤ n`, and `1`
    /// afterwards. The one-based vector `e_k` is the monomial of degree `k−1`.
    Example3 { n: usize },
    /// Anything supplied directly as log-weights.
    Custom,
}

impl WeightFamily {
    pub const IDS: [&'static str; 6] = [
        "constant",
        "drury-arveson",
        "bergman-ball",
        "hardy-ball",
        "factorial-delta",
        "example3",
    ];

    pub fn id(&self) -> &'static str {
        match self {
            WeightFamily::Constant => "constant",
            WeightFamily::DruryArveson => "drury-arveson",
            WeightFamily::BergmanBall => "bergman-ball",
            WeightFamily::HardyBall => "hardy-ball",
            WeightFamily::FactorialDelta { .. } => "factorial-delta",
            WeightFamily::Example3 { .. } => "example3",
            WeightFamily::Custom => "custom",
        }
    }

    /// Resolve a family id. `delta` is required for `factorial-delta`, `n`
    /// for `example3`.
    pub fn from_id(id: &str, delta: Option<f64>, n: Option<usize>) -> Result<Self, WeightError> {
        match id {
            "constant" => Ok(WeightFamily::Constant),
            "drury-arveson" => Ok(WeightFamily::DruryArveson),
            "bergman-ball" => Ok(WeightFamily::BergmanBall),
            "hardy-ball" => Ok(WeightFamily::HardyBall),
            "factorial-delta" => delta
                .map(|delta| WeightFamily::FactorialDelta { delta })
                .ok_or_else(|| WeightError::InvalidParameter("factorial-delta needs a delta".into())),
            "example3" => n
                .map(|n| WeightFamily::Example3 { n })
                .ok_or_else(|| WeightError::InvalidParameter("example3 needs n".into())),
            other => Err(WeightError::InvalidParameter(format!("unknown family `{other}`"))),
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            WeightFamily::Constant => "unweighted shifts, lambda = 1",
            WeightFamily::DruryArveson => "symmetric Fock space H^2_m, lambda^2 = a!/|a|!",
            WeightFamily::BergmanBall => "Bergman space of the ball, lambda^2 = a! m!/(|a|+m)!",
            WeightFamily::HardyBall => "Hardy space of the sphere, lambda^2 = a! (m-1)!/(|a|+m-1)!",
            WeightFamily::FactorialDelta { .. } => "lambda = ((1+|a|)!)^(-delta), needs delta > 0",
            WeightFamily::Example3 { .. } => "one-variable shift, weights sqrt(k/n) then 1, needs n >= 1, m = 1",
            WeightFamily::Custom => "user-supplied log-weights",
        }
    }

    /// Supremum of all shift weights over the infinite index set, where it is
    /// known in closed form. Every built-in ratio is monotone in the degree,
    /// so these are limits of the truncated suprema.
    pub fn known_shift_supremum(&self) -> Option<f64> {
        match self {
            WeightFamily::Constant
            | WeightFamily::DruryArveson
            | WeightFamily::BergmanBall
            | WeightFamily::HardyBall
            | WeightFamily::Example3 { .. } => Some(1.0),
            WeightFamily::FactorialDelta { delta } => Some(2f64.powf(-delta)),
            WeightFamily::Custom => None,
        }
    }

    fn ln_lambda(&self, alpha: &MultiIndex, m: usize) -> f64 {
        use statrs::function::factorial::ln_factorial;
        let deg = alpha.degree() as u64;
        let m = m as u64;
        match self {
            WeightFamily::Constant | WeightFamily::Custom => 0.0,
            WeightFamily::DruryArveson => 0.5 * (alpha.ln_factorial() - ln_factorial(deg)),
            WeightFamily::BergmanBall => {
                0.5 * (alpha.ln_factorial() + ln_factorial(m) - ln_factorial(deg + m))
            }
            WeightFamily::HardyBall => {
                0.5 * (alpha.ln_factorial() + ln_factorial(m - 1) - ln_factorial(deg + m - 1))
            }
            WeightFamily::FactorialDelta { delta } => -delta * ln_factorial(deg + 1),
            WeightFamily::Example3 { n } => (0..deg as usize).map(|d| example3_ln_shift_weight(*n, d + 1)).sum(),
        }
    }
}

/// `ln` of the Example-3 shift weight on the one-based vector `e_k`.
fn example3_ln_shift_weight(n: usize, k: usize) -> f64 {
    if k <= n {
        0.5 * (k as f64 / n as f64).ln()
    } else {
        0.0
    }
}

/// Positive weights on every monomial of a graded basis.
#[derive(Clone, Debug)]
pub struct WeightSet<R: Real> {
    basis: Arc<GradedBasis>,
    ln_lambda: Vec<R>,
    family: WeightFamily,
    label: String,
}

impl<R: Real> WeightSet<R> {
    pub fn build(basis: Arc<GradedBasis>, family: WeightFamily) -> Result<Self, WeightError> {
        let m = basis.num_vars();
        match family {
            WeightFamily::FactorialDelta { delta } if !(delta > 0.0 && delta.is_finite()) => {
                return Err(WeightError::InvalidParameter(format!("delta must be positive, got {delta}")));
            }
            WeightFamily::Example3 { n } if n < 1 => {
                return Err(WeightError::InvalidParameter("example3 needs n >= 1".into()));
            }
            WeightFamily::Example3 { .. } if m != 1 => {
                return Err(WeightError::InvalidParameter(format!(
                    "example3 weights live on one variable, basis has {m}"
                )));
            }
            _ => {}
        }
        let ln_lambda = basis
            .monomials()
            .iter()
            .map(|a| R::of(family.ln_lambda(a, m)))
            .collect();
        let label = match &family {
            WeightFamily::FactorialDelta { delta } => format!("factorial-delta(delta={delta})"),
            WeightFamily::Example3 { n } => format!("example3(n={n})"),
            f => f.id().to_string(),
        };
        Self::checked(basis, ln_lambda, family, label)
    }

    pub fn drury_arveson(basis: Arc<GradedBasis>) -> Result<Self, WeightError> {
        Self::build(basis, WeightFamily::DruryArveson)
    }

    pub fn bergman_ball(basis: Arc<GradedBasis>) -> Result<Self, WeightError> {
        Self::build(basis, WeightFamily::BergmanBall)
    }

    pub fn hardy_ball(basis: Arc<GradedBasis>) -> Result<Self, WeightError> {
        Self::build(basis, WeightFamily::HardyBall)
    }

    pub fn factorial_delta(basis: Arc<GradedBasis>, delta: f64) -> Result<Self, WeightError> {
        Self::build(basis, WeightFamily::FactorialDelta { delta })
    }

    pub fn example3(basis: Arc<GradedBasis>, n: usize) -> Result<Self, WeightError> {
        Self::build(basis, WeightFamily::Example3 { n })
    }

    /// Weights given directly as `ln λ_α`, one per monomial in basis order.
    pub fn from_ln_weights(
        basis: Arc<GradedBasis>,
        ln_lambda: Vec<R>,
        label: impl Into<String>,
    ) -> Result<Self, WeightError> {
        Self::checked(basis, ln_lambda, WeightFamily::Custom, label.into())
    }

    fn checked(
        basis: Arc<GradedBasis>,
        ln_lambda: Vec<R>,
        family: WeightFamily,
        label: String,
    ) -> Result<Self, WeightError> {
        let expected = basis.monomials().len();
        if ln_lambda.len() != expected {
            return Err(WeightError::LengthMismatch {
                expected,
                got: ln_lambda.len(),
            });
        }
        if let Some(pos) = ln_lambda.iter().position(|v| !v.is_finite()) {
            return Err(WeightError::NonFinite {
                index: basis.monomials()[pos].clone(),
            });
        }
        Ok(WeightSet {
            basis,
            ln_lambda,
            family,
            label,
        })
    }

    pub fn basis(&self) -> &Arc<GradedBasis> {
        &self.basis
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn ln_lambda(&self, alpha: &MultiIndex) -> Option<R> {
        self.basis.monomial_position(alpha).map(|p| self.ln_lambda[p])
    }

    /// `ln λ` by monomial position.
    pub fn ln_lambda_at(&self, position: usize) -> R {
        self.ln_lambda[position]
    }

    /// `λ_α`. May underflow to zero for steep families; use
    /// [`ln_lambda`](Self::ln_lambda) when that matters.
    pub fn lambda(&self, alpha: &MultiIndex) -> Option<R> {
        self.ln_lambda(alpha).map(|l| l.exp())
    }

    /// `λ_{α+e_var} / λ_α`, or `None` when `α + e_var` lies beyond the
    /// truncation.
    pub fn shift_weight(&self, alpha: &MultiIndex, var: usize) -> Option<R> {
        let from = self.ln_lambda(alpha)?;
        let to = self.ln_lambda(&alpha.raised(var))?;
        Some((to - from).exp())
    }

    /// Same weights on the sub-basis of degree ≤ `max_degree`.
    pub fn truncate(&self, max_degree: usize) -> Result<Self, WeightError> {
        if max_degree > self.basis.max_degree() {
            return Err(WeightError::DegreeBeyondBasis {
                requested: max_degree,
                available: self.basis.max_degree(),
            });
        }
        if max_degree == self.basis.max_degree() {
            return Ok(self.clone());
        }
        let basis = Arc::new(GradedBasis::enumerate(
            self.basis.num_vars(),
            max_degree,
            self.basis.multiplicity(),
        )?);
        let len = basis.monomials().len();
        Ok(WeightSet {
            ln_lambda: self.ln_lambda[..len].to_vec(),
            basis,
            family: self.family.clone(),
            label: self.label.clone(),
        })
    }

    /// Largest shift weight over every `(α, i)` with `|α| < max_degree`.
    pub fn truncated_shift_supremum(&self, max_degree: usize) -> R {
        let m = self.basis.num_vars();
        let mut sup = R::zero();
        for a in self.basis.monomials() {
            if a.degree() >= max_degree.min(self.basis.max_degree()) {
                break;
            }
            for var in 0..m {
                if let Some(w) = self.shift_weight(a, var) {
                    sup = sup.max(w);
                }
            }
        }
        sup
    }

    /// Plain-text snapshot: a header comment, then one
    /// `exponents<TAB>ln_lambda<TAB>lambda` line per monomial.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let b = &self.basis;
        let _ = writeln!(
            out,
            "# weights {} m={} N={} k={}",
            self.label,
            b.num_vars(),
            b.max_degree(),
            b.multiplicity()
        );
        let _ = writeln!(out, "# alpha\tln_lambda\tlambda");
        for (a, l) in b.monomials().iter().zip(&self.ln_lambda) {
            let exps: Vec<String> = a.exponents().iter().map(|e| e.to_string()).collect();
            let l = l.to_f64_lossy();
            let _ = writeln!(out, "{}\t{:?}\t{:?}", exps.join(","), l, l.exp());
        }
        out
    }

    /// Parse a [`to_table`](Self::to_table) snapshot against `basis`. The
    /// result is a custom weight set labelled from the header.
    pub fn from_table(basis: Arc<GradedBasis>, text: &str) -> Result<Self, WeightError> {
        let mut ln = vec![None; basis.monomials().len()];
        let mut label = String::from("custom");
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("# weights ") {
                if let Some(l) = rest.split_whitespace().next() {
                    label = l.to_string();
                }
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| WeightError::Table {
                line: line_no,
                reason: reason.to_string(),
            };
            let mut fields = line.split('\t');
            let alpha = fields.next().ok_or_else(|| bad("missing exponents"))?;
            let alpha: Vec<u32> = alpha
                .split(',')
                .map(|s| s.trim().parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad("bad exponent"))?;
            let value: f64 = fields
                .next()
                .ok_or_else(|| bad("missing ln_lambda"))?
                .trim()
                .parse()
                .map_err(|_| bad("bad ln_lambda"))?;
            let alpha = MultiIndex::new(alpha);
            let pos = basis
                .monomial_position(&alpha)
                .ok_or_else(|| bad("exponent vector not in basis"))?;
            ln[pos] = Some(R::of(value));
        }
        let ln = ln
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| WeightError::Table {
                    line: 0,
                    reason: format!("no entry for {}", basis.monomials()[i]),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::checked(basis, ln, WeightFamily::Custom, label)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Condition {
    /// `(*)'`: every shift bounded.
    Bounded,
    /// `(*)`: every shift contractive.
    Contractive,
    /// `(**)_p`: cross-commutators `[Z_i*, Z_j]` in `S_p`.
    CrossCommutatorSp,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub p: Option<f64>,
    pub satisfied_at_truncation: bool,
    pub witness_value: f64,
    pub trend: Vec<(usize, f64)>,
    pub verdict: Option<Verdict>,
}

pub fn check_condition<R: Real>(
    weights: &WeightSet<R>,
    condition: Condition,
    p: Option<f64>,
    degrees: &[usize],
) -> Result<ConditionReport, WeightError> {
    check_condition_with(weights, condition, p, degrees, &DiagnosticThresholds::default())
}

pub fn check_condition_with<R: Real>(
    weights: &WeightSet<R>,
    condition: Condition,
    p: Option<f64>,
    degrees: &[usize],
    thresholds: &DiagnosticThresholds,
) -> Result<ConditionReport, WeightError> {
    let top = weights.basis().max_degree();
    if let Some(&d) = degrees.iter().find(|&&d| d > top) {
        return Err(WeightError::DegreeBeyondBasis {
            requested: d,
            available: top,
        });
    }
    match condition {
        Condition::Bounded | Condition::Contractive => {
            let trend: Vec<(usize, f64)> = degrees
                .iter()
                .map(|&n| (n, weights.truncated_shift_supremum(n).to_f64_lossy()))
                .collect();
            let truncated = weights.truncated_shift_supremum(top).to_f64_lossy();
            let witness = match weights.family().known_shift_supremum() {
                Some(sup) => sup.max(truncated),
                None => truncated,
            };
            let satisfied = match condition {
                Condition::Bounded => witness.is_finite(),
                _ => witness <= 1.0 + 1e-12,
            };
            Ok(ConditionReport {
                condition,
                p,
                satisfied_at_truncation: satisfied,
                witness_value: witness,
                trend,
                verdict: None,
            })
        }
        Condition::CrossCommutatorSp => {
            let p = p.ok_or_else(|| WeightError::InvalidParameter("condition (**)_p needs p".into()))?;
            if !(p >= 1.0) {
                return Err(WeightError::InvalidParameter(format!("p must be >= 1, got {p}")));
            }
            let m = weights.basis().num_vars();
            let mut trend = Vec::with_capacity(degrees.len());
            for &n in degrees {
                let w = weights.truncate(n)?;
                let mut worst = 0.0f64;
                for i in 0..m {
                    for j in i..m {
                        let c = cross_commutator::<R>(&w, i, j)?;
                        let v = crate::schatten_analysis::schatten_norm(&c, p, Window::Interior)?;
                        worst = worst.max(v.to_f64_lossy());
                    }
                }
                trend.push((n, worst));
            }
            let diagnosis = convergence_diagnostic(&trend, thresholds);
            Ok(ConditionReport {
                condition,
                p: Some(p),
                satisfied_at_truncation: diagnosis.verdict == Verdict::Converging,
                witness_value: trend.last().map(|t| t.1).unwrap_or(0.0),
                trend,
                verdict: Some(diagnosis.verdict),
            })
        }
    }
}
