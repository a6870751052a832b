use serde::{Deserialize, Serialize};

use super::{
    einf, extract_point, null_coefficients, pair_kind, point_pair_split, EuclidPoint, PairKind,
    NULL_TOL,
};
use crate::algebra::{Blade, Multivector, Signature};

/// Relative tolerance for flatness and vanishing parts after scale normalization.
const SHAPE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometricObjectKind {
    Point,
    PointPair,
    Line,
    Circle,
    Plane,
    Sphere,
    Unknown,
}

impl GeometricObjectKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Point => "point",
            Self::PointPair => "point_pair",
            Self::Line => "line",
            Self::Circle => "circle",
            Self::Plane => "plane",
            Self::Sphere => "sphere",
            Self::Unknown => "unknown",
        }
    }
}

/// Decoded Euclidean parameters of a conformal object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometricObject {
    Point {
        position: EuclidPoint,
    },
    PointPair {
        first: EuclidPoint,
        second: EuclidPoint,
    },
    Line {
        point: EuclidPoint,
        direction: EuclidPoint,
    },
    Circle {
        center: EuclidPoint,
        normal: EuclidPoint,
        radius: f64,
    },
    /// `{x : x·normal = distance}` with a unit normal.
    Plane {
        normal: EuclidPoint,
        distance: f64,
    },
    Sphere {
        center: EuclidPoint,
        radius: f64,
    },
    Unknown,
}

impl GeometricObject {
    pub fn kind(&self) -> GeometricObjectKind {
        match self {
            Self::Point { .. } => GeometricObjectKind::Point,
            Self::PointPair { .. } => GeometricObjectKind::PointPair,
            Self::Line { .. } => GeometricObjectKind::Line,
            Self::Circle { .. } => GeometricObjectKind::Circle,
            Self::Plane { .. } => GeometricObjectKind::Plane,
            Self::Sphere { .. } => GeometricObjectKind::Sphere,
            Self::Unknown => GeometricObjectKind::Unknown,
        }
    }
}

fn euclid(mv: &Multivector) -> EuclidPoint {
    EuclidPoint::new(
        mv.coefficient(Blade::basis(1)),
        mv.coefficient(Blade::basis(2)),
        mv.coefficient(Blade::basis(3)),
    )
}

fn max_abs(mv: &Multivector) -> f64 {
    mv.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max)
}

/// Drops coefficients that are negligible relative to the largest one.
fn scale_normalized(mv: &Multivector) -> Option<Multivector> {
    let m = max_abs(mv);
    if !(m.is_finite() && m > 0.0) {
        return None;
    }
    let scaled = mv.scale(&(1.0 / m));
    Some(Multivector::from_terms(
        scaled.signature(),
        scaled
            .terms()
            .filter(|(_, c)| c.abs() > SHAPE_TOL)
            .map(|(b, c)| (b, *c)),
    ))
}

/// Interprets `mv` as an IPNS object and decodes it.
///
/// Grade 1 is a point, sphere or plane; grade 2 a circle or line; grade 3 a
/// point pair; grade 4 a point given in dual form. Anything else, including
/// imaginary spheres and pairs, is [`GeometricObject::Unknown`].
pub fn classify(mv: &Multivector) -> GeometricObject {
    if mv.signature() != Signature::cga3d() {
        return GeometricObject::Unknown;
    }
    let Some(x) = scale_normalized(mv) else {
        return GeometricObject::Unknown;
    };
    let decoded = match x.homogeneous_grade() {
        Some(1) => classify_vector(&x),
        Some(2) => classify_round_or_flat(&x),
        Some(3) => classify_pair(&x),
        Some(4) => x.undual().ok().and_then(|v| {
            extract_point(&v)
                .ok()
                .map(|position| GeometricObject::Point { position })
        }),
        _ => None,
    };
    match decoded {
        Some(object) if finite(&object) => object,
        _ => GeometricObject::Unknown,
    }
}

/// Interprets `mv` as an OPNS object: `classify(dual(mv))`.
pub fn classify_opns(mv: &Multivector) -> GeometricObject {
    match mv.dual() {
        Ok(d) => classify(&d),
        Err(_) => GeometricObject::Unknown,
    }
}

fn finite(object: &GeometricObject) -> bool {
    match object {
        GeometricObject::Point { position } => position.is_finite(),
        GeometricObject::PointPair { first, second } => first.is_finite() && second.is_finite(),
        GeometricObject::Line { point, direction } => point.is_finite() && direction.is_finite(),
        GeometricObject::Circle {
            center,
            normal,
            radius,
        } => center.is_finite() && normal.is_finite() && radius.is_finite(),
        GeometricObject::Plane { normal, distance } => normal.is_finite() && distance.is_finite(),
        GeometricObject::Sphere { center, radius } => center.is_finite() && radius.is_finite(),
        GeometricObject::Unknown => true,
    }
}

fn classify_vector(x: &Multivector) -> Option<GeometricObject> {
    let (alpha, beta) = null_coefficients(x);
    let direction = euclid(x);
    if beta.abs() <= SHAPE_TOL {
        let n = direction.norm();
        if n <= SHAPE_TOL {
            return None;
        }
        return Some(GeometricObject::Plane {
            normal: direction.scale(1.0 / n),
            distance: alpha / n,
        });
    }
    let center = direction.scale(1.0 / beta);
    let r2 = center.norm_squared() - 2.0 * alpha / beta;
    let scale = 1.0 + center.norm_squared();
    if r2.abs() <= NULL_TOL * scale {
        Some(GeometricObject::Point { position: center })
    } else if r2 > 0.0 {
        Some(GeometricObject::Sphere {
            center,
            radius: r2.sqrt(),
        })
    } else {
        None
    }
}

fn classify_round_or_flat(x: &Multivector) -> Option<GeometricObject> {
    let opns = x.undual().ok()?;
    let with_inf = opns.wedge(&einf()).ok()?;
    if max_abs(&with_inf) <= SHAPE_TOL * max_abs(&opns) {
        decode_line(&opns)
    } else {
        decode_circle(&opns)
    }
}

fn blade(indices: &[usize]) -> Blade {
    Blade(indices.iter().fold(0u16, |acc, i| acc | (1 << (i - 1))))
}

/// `X = λ(P1∧P2∧e∞)`: `e_i45` carries `λd` and `e_ij4` carries `λ(p1∧p2)`.
fn decode_line(opns: &Multivector) -> Option<GeometricObject> {
    let sig = opns.signature();
    let d = EuclidPoint::new(
        opns.coefficient(blade(&[1, 4, 5])),
        opns.coefficient(blade(&[2, 4, 5])),
        opns.coefficient(blade(&[3, 4, 5])),
    );
    let d2 = d.norm_squared();
    if d2 <= SHAPE_TOL * SHAPE_TOL {
        return None;
    }
    let moment = Multivector::from_terms(
        sig,
        [
            (blade(&[1, 2]), opns.coefficient(blade(&[1, 2, 4]))),
            (blade(&[1, 3]), opns.coefficient(blade(&[1, 3, 4]))),
            (blade(&[2, 3]), opns.coefficient(blade(&[2, 3, 4]))),
        ],
    );
    let foot = moment.gp(&d.to_vector()).ok()?.grade_part(1);
    let direction = d.scale(1.0 / d2.sqrt());
    Some(GeometricObject::Line {
        point: euclid(&foot).scale(1.0 / d2),
        direction,
    })
}

fn decode_circle(opns: &Multivector) -> Option<GeometricObject> {
    let inf = einf();
    let center_mv = opns.gp(&inf).ok()?.gp(opns).ok()?.grade_part(1);
    let center = extract_point(&center_mv).ok()?;
    let carrier = opns.wedge(&inf).ok()?.dual().ok()?;
    let normal = euclid(&carrier);
    let n = normal.norm();
    if n <= SHAPE_TOL {
        return None;
    }
    let weight = inf.lcont(opns).ok()?;
    let r2 = -opns.scalar_product(opns).ok()? / weight.scalar_product(&weight).ok()?;
    if r2.is_nan() || r2 <= 0.0 {
        return None;
    }
    Some(GeometricObject::Circle {
        center,
        normal: normal.scale(1.0 / n),
        radius: r2.sqrt(),
    })
}

fn classify_pair(x: &Multivector) -> Option<GeometricObject> {
    let opns = x.dual().ok()?;
    let flat = opns.wedge(&einf()).ok()?;
    if max_abs(&flat) <= SHAPE_TOL * max_abs(&opns) {
        return decode_flat_point(&opns);
    }
    match pair_kind(x).ok()? {
        PairKind::Imaginary => None,
        PairKind::Tangent => {
            let (p, _) = point_pair_split(x).ok()?;
            Some(GeometricObject::Point { position: p })
        }
        PairKind::Real => {
            let (first, second) = point_pair_split(x).ok()?;
            Some(GeometricObject::PointPair { first, second })
        }
    }
}

/// `F = λ(P∧e∞)`: `e45` carries `−λ` and `e_i4`, `e_i5` carry `λp_i`.
fn decode_flat_point(opns: &Multivector) -> Option<GeometricObject> {
    let lambda = -opns.coefficient(blade(&[4, 5]));
    if lambda.abs() <= SHAPE_TOL {
        return None;
    }
    let p = EuclidPoint::new(
        opns.coefficient(blade(&[1, 4])),
        opns.coefficient(blade(&[2, 4])),
        opns.coefficient(blade(&[3, 4])),
    );
    Some(GeometricObject::Point {
        position: p.scale(1.0 / lambda),
    })
}
