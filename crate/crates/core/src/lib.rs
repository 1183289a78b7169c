//! Truncated weighted-shift Hilbert modules over the unit ball: graded
//! monomial bases, weight models, coordinate shifts, submodules, and
//! Schatten-class diagnostics of their commutators.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiments;
pub mod graded_basis;
pub mod polynomial_syntax;
pub mod scalar;
pub mod schatten_analysis;
pub mod shift_operators;
pub mod submodule_builder;
pub mod weight_models;

pub use nalgebra::Complex;

pub use graded_basis::{GradedBasis, MultiIndex};
pub use scalar::{Real, Scalar};
pub use schatten_analysis::{DiagnosticThresholds, Verdict, Window};
pub use shift_operators::{Layout, Projection, TruncatedOperator};
pub use submodule_builder::{PolynomialGenerator, Side, SubmoduleBasis};
pub use weight_models::{WeightFamily, WeightSet};

pub type Weights = WeightSet<f64>;
pub type Weights32 = WeightSet<f32>;
pub type Operator = TruncatedOperator<f64>;
pub type Operator32 = TruncatedOperator<f32>;
pub type ComplexOperator = TruncatedOperator<Complex<f64>>;
pub type Submodule = SubmoduleBasis<f64>;
pub type ComplexSubmodule = SubmoduleBasis<Complex<f64>>;
pub type Generator = PolynomialGenerator<f64>;
