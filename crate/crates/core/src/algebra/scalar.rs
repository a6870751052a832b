use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Absolute tolerance used for sparse-form pruning and invertibility checks.
pub const ZERO_TOL: f64 = 1e-12;

/// Coefficient type of a [`Multivector`](super::Multivector).
///
/// Every algebra operation is written once against this trait, so the same
/// kernel runs on plain `f64` values and on symbolic
/// [`ScalarExpr`](crate::symbolic::ScalarExpr) trees.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(value: f64) -> Self;

    /// True when the value is known to be zero (within [`ZERO_TOL`] for numbers).
    fn is_zero(&self) -> bool;

    /// The numeric value, when it is known without further context.
    fn constant(&self) -> Option<f64>;

    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_f64(value: f64) -> Self {
        value
    }

    fn is_zero(&self) -> bool {
        self.abs() <= ZERO_TOL
    }

    fn constant(&self) -> Option<f64> {
        Some(*self)
    }

    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn sin(self) -> Self {
        f64::sin(self)
    }

    fn cos(self) -> Self {
        f64::cos(self)
    }
}
