//! Scalar traits shared by every numeric module.
//!
//! Weights, submodule bases and spectra are generic over a real field `R`;
//! operators are generic over a (possibly complex) field `S` whose real part
//! is an `R`. Conversions to and from `f64` go through `num-traits`.

use nalgebra::{ComplexField, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable for weights, norms and spectra (`f32`, `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Lossy conversion from `f64`; panics only for values the type cannot
    /// represent at all (never for finite inputs with `f32`/`f64`).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive {}

/// Operator entry type: a real or complex field over a [`Real`].
pub trait Scalar: ComplexField<RealField: Real> + Copy {
    fn of_real(x: Self::RealField) -> Self {
        Self::from_real(x)
    }

    fn of_f64(x: f64) -> Self {
        Self::from_real(<Self::RealField as Real>::of(x))
    }
}

impl<T> Scalar for T where T: ComplexField<RealField: Real> + Copy {}
