//! Clifford algebra kernel over diagonal metrics.
//!
//! A [`Multivector`] is a sparse map from [`Blade`] bitmasks to coefficients.
//! Products are computed blade by blade with [`basis_product`]; the
//! coefficient type is any [`Scalar`], so the same code evaluates numbers and
//! builds symbolic expressions.

mod blade;
mod multivector;
mod scalar;
mod signature;

pub use blade::{basis_product, Blade};
pub use multivector::{reverse_sign, Multivector};
pub use scalar::{Scalar, ZERO_TOL};
pub use signature::{Signature, MAX_DIMENSION};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("operands belong to different algebras ({left} vs {right})")]
    AlgebraMismatch { left: String, right: String },
    #[error("multivector has zero norm")]
    ZeroNorm,
    #[error("multivector is not invertible")]
    NotInvertible,
    #[error("bivector square is not a scalar")]
    NonScalarSquare,
    #[error("dual is undefined for a degenerate metric")]
    DegenerateMetric,
    #[error("algebra dimension {0} exceeds the supported maximum of 16")]
    DimensionTooLarge(usize),
    #[error("unknown algebra signature `{0}`")]
    UnknownSignature(String),
}
