//! Coefficient fields shared by the symbolic, floating-point and interval layers.
//!
//! Everything in the crate is generic over [`Scalar`], implemented for `f64`
//! and [`Complex64`]. Each scalar type names the rigorous enclosure type used
//! for it: real intervals for `f64`, axis-aligned complex rectangles for
//! `Complex64`.

use std::fmt;

use nalgebra::ComplexField;
use num_complex::Complex64;

use crate::interval::{CInterval, Enclosure, Interval};

/// A binary64 coefficient field: the reals or the complex numbers.
pub trait Scalar:
    ComplexField<RealField = f64> + Copy + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    /// Rigorous enclosure type for values of this field.
    type Enclosure: Enclosure<Point = Self>;

    const IS_COMPLEX: bool;

    /// Builds a value from real and imaginary parts; `None` when the field is
    /// real and `im != 0`.
    fn from_parts(re: f64, im: f64) -> Option<Self>;

    fn re(&self) -> f64;

    fn im(&self) -> f64;

    fn is_exact_zero(&self) -> bool {
        self.re() == 0.0 && self.im() == 0.0
    }

    /// Largest absolute value of the real and imaginary parts.
    fn max_part(&self) -> f64 {
        self.re().abs().max(self.im().abs())
    }

    fn is_finite_value(&self) -> bool {
        self.re().is_finite() && self.im().is_finite()
    }
}

impl Scalar for f64 {
    type Enclosure = Interval;

    const IS_COMPLEX: bool = false;

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re)
    }

    fn re(&self) -> f64 {
        *self
    }

    fn im(&self) -> f64 {
        0.0
    }
}

impl Scalar for Complex64 {
    type Enclosure = CInterval;

    const IS_COMPLEX: bool = true;

    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex64::new(re, im))
    }

    fn re(&self) -> f64 {
        self.re
    }

    fn im(&self) -> f64 {
        self.im
    }
}

/// `1/k!` as a binary64 value.
pub fn inverse_factorial(k: u32) -> f64 {
    let mut f = 1.0_f64;
    for i in 2..=k {
        f *= f64::from(i);
    }
    1.0 / f
}
