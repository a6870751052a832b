//! Conformal model of 3D Euclidean space in Cl(4,1).
//!
//! The algebra uses a diagonal basis: `e4` squares to `+1`, `e5` to `-1`.
//! The null vectors are derived from them:
//!
//! ```text
//! e∞ = e5 + e4        e0 = ½(e5 − e4)        e∞ ⌋ e0 = −1
//! ```
//!
//! Spheres and planes are represented as grade-1 IPNS vectors; intersections
//! are outer products of IPNS objects. Lines and circles built from points are
//! OPNS blades and [`Multivector::dual`] converts between the two views.

mod classify;

pub use classify::{classify, classify_opns, GeometricObject, GeometricObjectKind};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, Blade, Multivector, Scalar, Signature};

/// Tolerance used when testing decoded points for nullness.
pub const NULL_TOL: f64 = 1e-9;
/// Tolerance on the point-pair discriminant below which the pair is tangent.
pub const TANGENT_TOL: f64 = 1e-12;

const E_PLUS: usize = 4;
const E_MINUS: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CgaError {
    #[error("multivector is not a point")]
    NotAPoint,
    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),
    #[error("the objects do not intersect (imaginary point pair)")]
    ImaginaryPair,
    #[error("intersection needs at least two objects")]
    TooFewObjects,
    #[error("expected a multivector of the conformal algebra cga3d")]
    WrongAlgebra,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A point of 3D Euclidean space in model coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EuclidPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl EuclidPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm_squared(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(&self, other: &EuclidPoint) -> f64 {
        (*self - *other).norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(&self, other: &EuclidPoint) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &EuclidPoint) -> EuclidPoint {
        EuclidPoint::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// The Euclidean vector `x e1 + y e2 + z e3`.
    pub fn to_vector(&self) -> Multivector {
        euclidean_vector(self.x, self.y, self.z)
    }
}

impl std::ops::Sub for EuclidPoint {
    type Output = EuclidPoint;
    fn sub(self, rhs: Self) -> Self {
        EuclidPoint::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl std::ops::Add for EuclidPoint {
    type Output = EuclidPoint;
    fn add(self, rhs: Self) -> Self {
        EuclidPoint::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

fn sig() -> Signature {
    Signature::cga3d()
}

/// Point at infinity `e∞`.
pub fn einf<S: Scalar>() -> Multivector<S> {
    Multivector::basis(sig(), E_PLUS) + Multivector::basis(sig(), E_MINUS)
}

/// Origin `e0`.
pub fn e0<S: Scalar>() -> Multivector<S> {
    let half = S::from_f64(0.5);
    Multivector::from_terms(
        sig(),
        [
            (Blade::basis(E_MINUS), half.clone()),
            (Blade::basis(E_PLUS), -half),
        ],
    )
}

/// `x e1 + y e2 + z e3`.
pub fn euclidean_vector<S: Scalar>(x: S, y: S, z: S) -> Multivector<S> {
    Multivector::from_terms(
        sig(),
        [
            (Blade::basis(1), x),
            (Blade::basis(2), y),
            (Blade::basis(3), z),
        ],
    )
}

/// Conformal point `x + ½x²e∞ + e0` for scalar coordinates of any kind.
pub fn point_from_coords<S: Scalar>(x: S, y: S, z: S) -> Multivector<S> {
    let half_square =
        S::from_f64(0.5) * (x.clone() * x.clone() + y.clone() * y.clone() + z.clone() * z.clone());
    euclidean_vector(x, y, z) + einf::<S>().scale(&half_square) + e0()
}

/// Embeds a Euclidean point as a null vector of the conformal algebra.
pub fn embed_point(p: EuclidPoint) -> Multivector {
    point_from_coords(p.x, p.y, p.z)
}

/// Coefficients `(α, β)` of `e∞` and `e0` in the vector part of `mv`.
pub fn null_coefficients<S: Scalar>(mv: &Multivector<S>) -> (S, S) {
    let a = mv.coefficient(Blade::basis(E_PLUS));
    let b = mv.coefficient(Blade::basis(E_MINUS));
    let einf_part = S::from_f64(0.5) * (a.clone() + b.clone());
    (einf_part, b - a)
}

fn ensure_cga(mv: &Multivector) -> Result<(), CgaError> {
    if mv.signature() == sig() {
        Ok(())
    } else {
        Err(CgaError::WrongAlgebra)
    }
}

/// Decodes a (possibly scaled) conformal point.
pub fn extract_point(mv: &Multivector) -> Result<EuclidPoint, CgaError> {
    ensure_cga(mv)?;
    if mv.homogeneous_grade() != Some(1) {
        return Err(CgaError::NotAPoint);
    }
    let (_, weight) = null_coefficients(mv);
    if weight.abs() <= 1e-12 {
        return Err(CgaError::NotAPoint);
    }
    let normalized = mv.scale(&(1.0 / weight));
    let square = normalized.scalar_product(&normalized)?;
    if square.abs() > NULL_TOL {
        return Err(CgaError::NotAPoint);
    }
    Ok(EuclidPoint::new(
        normalized.coefficient(Blade::basis(1)),
        normalized.coefficient(Blade::basis(2)),
        normalized.coefficient(Blade::basis(3)),
    ))
}

/// IPNS sphere `C − ½r²e∞` around an already embedded center.
pub fn sphere_from_center<S: Scalar>(center: &Multivector<S>, radius: S) -> Multivector<S> {
    let shift = S::from_f64(0.5) * radius.clone() * radius;
    center.clone() - einf::<S>().scale(&shift)
}

pub fn sphere_ipns(center: EuclidPoint, radius: f64) -> Multivector {
    sphere_from_center(&embed_point(center), radius)
}

/// IPNS plane `n̂ + d e∞` from normal components and signed offset.
pub fn plane_from_coeffs<S: Scalar>(nx: S, ny: S, nz: S, d: S) -> Multivector<S> {
    let length =
        (nx.clone() * nx.clone() + ny.clone() * ny.clone() + nz.clone() * nz.clone()).sqrt();
    let unit = euclidean_vector(nx, ny, nz).scale(&(S::one() / length));
    unit + einf::<S>().scale(&d)
}

/// Plane `{x : x·n̂ = d}`.
pub fn plane_ipns(normal: EuclidPoint, d: f64) -> Result<Multivector, CgaError> {
    if normal.norm() <= 1e-12 {
        return Err(CgaError::DegenerateInput("plane normal is zero"));
    }
    Ok(plane_from_coeffs(normal.x, normal.y, normal.z, d))
}

/// OPNS line `P1 ∧ P2 ∧ e∞`.
pub fn line_opns(p1: EuclidPoint, p2: EuclidPoint) -> Result<Multivector, CgaError> {
    if p1.distance(&p2) <= 1e-12 {
        return Err(CgaError::DegenerateInput("line needs two distinct points"));
    }
    Ok(&(&embed_point(p1) ^ &embed_point(p2)) ^ &einf())
}

/// OPNS circle `P1 ∧ P2 ∧ P3`.
pub fn circle_opns(
    p1: EuclidPoint,
    p2: EuclidPoint,
    p3: EuclidPoint,
) -> Result<Multivector, CgaError> {
    if (p2 - p1).cross(&(p3 - p1)).norm() <= 1e-12 {
        return Err(CgaError::DegenerateInput(
            "circle needs three non-collinear points",
        ));
    }
    Ok(&(&embed_point(p1) ^ &embed_point(p2)) ^ &embed_point(p3))
}

/// Translator `1 − ½ t e∞` for a symbolic or numeric offset.
pub fn translator_from_coords<S: Scalar>(x: S, y: S, z: S) -> Multivector<S> {
    let t = euclidean_vector(x, y, z);
    let half = S::from_f64(-0.5);
    Multivector::scalar(sig(), S::one()) + (&t * &einf::<S>()).scale(&half)
}

pub fn translator(t: EuclidPoint) -> Multivector {
    translator_from_coords(t.x, t.y, t.z)
}

/// Rotor `cos(θ/2) − sin(θ/2) B` for a unit Euclidean bivector `B`.
pub fn rotor_from<S: Scalar>(plane: &Multivector<S>, angle: S) -> Multivector<S> {
    let half = angle * S::from_f64(0.5);
    Multivector::scalar(plane.signature(), half.clone().cos()) - plane.scale(&half.sin())
}

/// Rotor `exp(−(θ/2) B)`; rotates by `angle` in the oriented plane `B`.
pub fn rotor(plane_bivector: &Multivector, angle: f64) -> Result<Multivector, CgaError> {
    Ok(plane_bivector.scale(&(-angle / 2.0)).exp_bivector()?)
}

/// Reflection in a mirror: `−M A M⁻¹` for odd mirrors, `M A M⁻¹` otherwise.
pub fn reflect<S: Scalar>(
    a: &Multivector<S>,
    mirror: &Multivector<S>,
) -> Result<Multivector<S>, AlgebraError> {
    let image = Multivector::sandwich(mirror, a)?;
    let odd = mirror.blades().all(|b| b.grade() % 2 == 1);
    Ok(if odd && !mirror.is_zero() {
        -image
    } else {
        image
    })
}

/// `(A ⌋ B) B⁻¹`.
pub fn project<S: Scalar>(
    a: &Multivector<S>,
    b: &Multivector<S>,
) -> Result<Multivector<S>, AlgebraError> {
    a.lcont(b)?.gp(&b.inverse()?)
}

/// IPNS meet: outer product of all objects.
pub fn intersect_ipns(objects: &[Multivector]) -> Result<Multivector, CgaError> {
    let (first, rest) = objects.split_first().ok_or(CgaError::TooFewObjects)?;
    if rest.is_empty() {
        return Err(CgaError::TooFewObjects);
    }
    let mut out = first.clone();
    for o in rest {
        out = out.wedge(o)?;
    }
    Ok(out)
}

/// Pieces of the point-pair split formula for an IPNS point pair.
///
/// Returns the OPNS pair `T`, the discriminant `⟨T T⟩₀` and `v = −e∞ ⌋ T`;
/// the points are `(T ± √disc) v⁻¹`.
pub fn point_pair_parts<S: Scalar>(
    pair_ipns: &Multivector<S>,
) -> Result<(Multivector<S>, S, Multivector<S>), AlgebraError> {
    let opns = pair_ipns.dual()?;
    let disc = opns.scalar_product(&opns)?;
    let carrier = -einf::<S>().lcont(&opns)?;
    Ok((opns, disc, carrier))
}

/// One point of a point pair given the square root of its discriminant.
pub fn point_pair_point<S: Scalar>(
    opns: &Multivector<S>,
    signed_root: S,
    carrier_inverse: &Multivector<S>,
) -> Result<Multivector<S>, AlgebraError> {
    let shifted = opns.clone() + Multivector::scalar(opns.signature(), signed_root);
    Ok(shifted.gp(carrier_inverse)?.grade_part(1))
}

/// Whether an IPNS point pair splits into real points, touches, or is imaginary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    Real,
    Tangent,
    Imaginary,
}

pub fn pair_kind(pair_ipns: &Multivector) -> Result<PairKind, CgaError> {
    let (opns, disc, _) = point_pair_parts(pair_ipns)?;
    let scale = opns
        .scalar_product(&opns.reverse())?
        .abs()
        .max(f64::MIN_POSITIVE);
    let relative = disc / scale;
    Ok(if relative.abs() <= TANGENT_TOL {
        PairKind::Tangent
    } else if relative < 0.0 {
        PairKind::Imaginary
    } else {
        PairKind::Real
    })
}

/// Splits a grade-3 IPNS point pair into its two points.
///
/// A tangent pair returns the same point twice.
pub fn point_pair_split(pair_ipns: &Multivector) -> Result<(EuclidPoint, EuclidPoint), CgaError> {
    ensure_cga(pair_ipns)?;
    let kind = pair_kind(pair_ipns)?;
    let (opns, disc, carrier) = point_pair_parts(pair_ipns)?;
    let carrier_inverse = carrier.inverse()?;
    let root = match kind {
        PairKind::Imaginary => return Err(CgaError::ImaginaryPair),
        PairKind::Tangent => 0.0,
        PairKind::Real => disc.sqrt(),
    };
    let first = extract_point(&point_pair_point(&opns, root, &carrier_inverse)?)?;
    let second = extract_point(&point_pair_point(&opns, -root, &carrier_inverse)?)?;
    Ok((first, second))
}
