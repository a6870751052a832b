//! Symbolic scalars for compile-time multivector evaluation.
//!
//! A [`ScalarExpr`] is a plain expression tree. Running the algebra kernel
//! with `ScalarExpr` coefficients yields, blade by blade, the closed-form
//! expression of every coefficient; blades whose expression folds to zero
//! never appear in the result.

mod emit;
mod expr;

pub use emit::{python_float, python_identifier, EmissionStyle, IrError, IrNode};
pub use expr::{checked_sqrt, EvalError, ScalarExpr, DIVISION_TOL};
