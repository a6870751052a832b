//! Expression evaluation shared by the numeric interpreter and the compiler.

use crate::algebra::{Multivector, Scalar, Signature};
use crate::cga;
use crate::script::{BasisVec, BinaryOp, Builtin, Expr, ExprKind, Span, UnaryOp};

use super::Failure;

/// Scalar world an expression is evaluated in.
pub(crate) trait Domain {
    type S: Scalar;

    fn space(&self) -> Signature;
    fn lookup(&self, name: &str) -> Result<Multivector<Self::S>, Failure>;
    /// Removes blades whose coefficients are zero in this domain.
    fn clean(&mut self, mv: Multivector<Self::S>) -> Multivector<Self::S>;
    fn sqrt(&self, value: Self::S) -> Result<Self::S, Failure>;
    /// `1 / value`, or `None` when `value` is zero.
    fn reciprocal(&self, value: &Self::S) -> Option<Self::S>;
    /// Failure reported when a divisor does not square to a scalar.
    fn non_scalar_divisor(&self) -> Failure;
}

type Outcome<S> = Result<Multivector<S>, (Failure, Span)>;

pub(crate) fn eval<D: Domain>(d: &mut D, e: &Expr) -> Outcome<D::S> {
    let at = |f: Failure| (f, e.span);
    let space = d.space();
    match &e.kind {
        ExprKind::Num(v) => Ok(Multivector::scalar(space, D::S::from_f64(*v))),
        ExprKind::Ident(name) => d.lookup(name).map_err(at),
        ExprKind::Basis(b) => basis(space, *b).map_err(at),
        ExprKind::Unary(op, operand) => {
            let v = eval(d, operand)?;
            Ok(match op {
                UnaryOp::Neg => -v,
                UnaryOp::Reverse => v.reverse(),
            })
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let a = eval(d, lhs)?;
            let b = eval(d, rhs)?;
            let out = match op {
                BinaryOp::Add => Ok(a + b),
                BinaryOp::Sub => Ok(a - b),
                BinaryOp::Gp => a.gp(&b).map_err(Failure::from),
                BinaryOp::Wedge => a.wedge(&b).map_err(Failure::from),
                BinaryOp::Lcont => a.lcont(&b).map_err(Failure::from),
                BinaryOp::Div => inverse(d, &b).and_then(|inv| a.gp(&inv).map_err(Failure::from)),
            };
            out.map_err(at)
        }
        ExprKind::Call { name, args } => {
            let f = Builtin::from_name(name)
                .ok_or_else(|| at(Failure::UnknownFunction(name.clone())))?;
            if f.arity() != args.len() {
                return Err(at(Failure::UnknownFunction(name.clone())));
            }
            if f.needs_conformal() && space != Signature::cga3d() {
                return Err(at(Failure::RequiresConformal(f.name())));
            }
            let mut values = Vec::with_capacity(args.len());
            for a in args {
                values.push(eval(d, a)?);
            }
            call(d, f, values).map_err(at)
        }
    }
}

fn basis<S: Scalar>(space: Signature, b: BasisVec) -> Result<Multivector<S>, Failure> {
    let index = match b {
        BasisVec::E1 => 1,
        BasisVec::E2 => 2,
        BasisVec::E3 => 3,
        BasisVec::Einf | BasisVec::E0 => {
            if space != Signature::cga3d() {
                return Err(Failure::RequiresConformal(b.name()));
            }
            return Ok(if b == BasisVec::Einf {
                cga::einf()
            } else {
                cga::e0()
            });
        }
    };
    if index > space.dimension() {
        return Err(Failure::BasisOutOfRange(b.name()));
    }
    Ok(Multivector::basis(space, index))
}

/// `~b / <b ~b>`, requiring `b ~b` to clean to a scalar.
pub(crate) fn inverse<D: Domain>(
    d: &mut D,
    b: &Multivector<D::S>,
) -> Result<Multivector<D::S>, Failure> {
    let b = d.clean(b.clone());
    let reversed = b.reverse();
    let square = d.clean(b.gp(&reversed)?);
    if square.blades().any(|bl| bl.grade() != 0) {
        return Err(d.non_scalar_divisor());
    }
    let s = square.scalar_part();
    let r = d.reciprocal(&s).ok_or(Failure::NotInvertible)?;
    Ok(reversed.scale(&r))
}

fn scalar_arg<D: Domain>(d: &mut D, f: Builtin, v: Multivector<D::S>) -> Result<D::S, Failure> {
    let v = d.clean(v);
    if v.blades().any(|b| b.grade() != 0) {
        return Err(Failure::ExpectedScalar(f.name()));
    }
    Ok(v.scalar_part())
}

fn call<D: Domain>(
    d: &mut D,
    f: Builtin,
    args: Vec<Multivector<D::S>>,
) -> Result<Multivector<D::S>, Failure> {
    let space = d.space();
    let scalar = |s: D::S| Multivector::scalar(space, s);
    let mut args = args.into_iter();
    let mut next = || args.next().expect("arity checked");
    Ok(match f {
        Builtin::Sqrt => {
            let x = scalar_arg(d, f, next())?;
            scalar(d.sqrt(x)?)
        }
        Builtin::Abs => scalar(scalar_arg(d, f, next())?.abs()),
        Builtin::Reverse => next().reverse(),
        Builtin::Dual => next().dual()?,
        Builtin::Inverse => inverse(d, &next())?,
        Builtin::Norm => scalar(norm(d, &next())?),
        Builtin::Normalize => {
            let a = next();
            let n = norm(d, &a)?;
            let r = d.reciprocal(&n).ok_or(Failure::ZeroNorm)?;
            a.scale(&r)
        }
        Builtin::CreatePoint => {
            let x = scalar_arg(d, f, next())?;
            let y = scalar_arg(d, f, next())?;
            let z = scalar_arg(d, f, next())?;
            cga::point_from_coords(x, y, z)
        }
        Builtin::CreateSphere => {
            let center = next();
            let r = scalar_arg(d, f, next())?;
            cga::sphere_from_center(&center, r)
        }
        Builtin::CreatePlane => {
            let nx = scalar_arg(d, f, next())?;
            let ny = scalar_arg(d, f, next())?;
            let nz = scalar_arg(d, f, next())?;
            let dist = scalar_arg(d, f, next())?;
            let length = d.sqrt(
                nx.clone() * nx.clone() + ny.clone() * ny.clone() + nz.clone() * nz.clone(),
            )?;
            let inv = d
                .reciprocal(&length)
                .ok_or(Failure::Degenerate("plane normal is zero"))?;
            cga::euclidean_vector(nx, ny, nz).scale(&inv) + cga::einf::<D::S>().scale(&dist)
        }
        Builtin::CreateLine => {
            let p1 = next();
            let p2 = next();
            p1.wedge(&p2)?.wedge(&cga::einf())?.dual()?
        }
        Builtin::CreateCircle => {
            let p1 = next();
            let p2 = next();
            let p3 = next();
            p1.wedge(&p2)?.wedge(&p3)?.dual()?
        }
        Builtin::Translator => {
            let x = scalar_arg(d, f, next())?;
            let y = scalar_arg(d, f, next())?;
            let z = scalar_arg(d, f, next())?;
            cga::translator_from_coords(x, y, z)
        }
        Builtin::Rotor => {
            let plane = next();
            let angle = scalar_arg(d, f, next())?;
            cga::rotor_from(&plane, angle)
        }
        Builtin::Project => {
            let a = next();
            let b = next();
            a.lcont(&b)?.gp(&inverse(d, &b)?)?
        }
        Builtin::Reflect => {
            let a = next();
            let mirror = d.clean(next());
            let image = mirror.gp(&a)?.gp(&inverse(d, &mirror)?)?;
            let odd = !mirror.is_zero() && mirror.blades().all(|b| b.grade() % 2 == 1);
            if odd {
                -image
            } else {
                image
            }
        }
        Builtin::Sandwich => {
            let v = next();
            let a = next();
            v.gp(&a)?.gp(&inverse(d, &v)?)?
        }
        Builtin::SplitPointPair => {
            let pair = next();
            let sign = scalar_arg(d, f, next())?;
            let (opns, disc, carrier) = cga::point_pair_parts(&pair)?;
            let root = d.sqrt(disc)?;
            let carrier_inverse = inverse(d, &carrier)?;
            cga::point_pair_point(&opns, sign * root, &carrier_inverse)?
        }
    })
}

fn norm<D: Domain>(d: &mut D, a: &Multivector<D::S>) -> Result<D::S, Failure> {
    let square = a.scalar_product(&a.reverse())?;
    d.sqrt(square.abs())
}
