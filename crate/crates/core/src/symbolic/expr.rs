use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

use crate::algebra::{Scalar, ZERO_TOL};

/// Denominators at or below this magnitude are treated as division by zero.
pub const DIVISION_TOL: f64 = 1e-300;

/// Symbolic scalar expression tree.
///
/// Values built through the arithmetic operators (or [`ScalarExpr::simplify`])
/// are kept in canonical form: constants folded, `Add`/`Mul` flattened with at
/// least two children, no `+ 0` or `* 1`, negation pushed through sums, and
/// repeated factors merged into `Pow`. Child order is insertion order.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Const(f64),
    Var(String),
    Add(Vec<ScalarExpr>),
    Mul(Vec<ScalarExpr>),
    Neg(Box<ScalarExpr>),
    Div(Box<ScalarExpr>, Box<ScalarExpr>),
    Pow(Box<ScalarExpr>, i32),
    Sqrt(Box<ScalarExpr>),
    Abs(Box<ScalarExpr>),
    Sin(Box<ScalarExpr>),
    Cos(Box<ScalarExpr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("domain error: {0}")]
    DomainError(String),
}

use ScalarExpr::*;

impl ScalarExpr {
    pub fn var(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn constant(value: f64) -> Self {
        Const(value)
    }

    pub fn pow(self, exponent: i32) -> Self {
        fold_pow(self, exponent)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Rebuilds the tree bottom-up through the canonicalizing constructors.
    pub fn simplify(&self) -> Self {
        match self {
            Const(_) | Var(_) => self.clone(),
            Add(terms) => fold_add(terms.iter().map(Self::simplify).collect()),
            Mul(factors) => fold_mul(factors.iter().map(Self::simplify).collect()),
            Neg(a) => negate(a.simplify()),
            Div(n, d) => fold_div(n.simplify(), d.simplify()),
            Pow(b, n) => fold_pow(b.simplify(), *n),
            Sqrt(a) => fold_sqrt(a.simplify()),
            Abs(a) => fold_abs(a.simplify()),
            Sin(a) => fold_sin(a.simplify()),
            Cos(a) => fold_cos(a.simplify()),
        }
    }

    pub fn evaluate(&self, bindings: &HashMap<String, f64>) -> Result<f64, EvalError> {
        self.evaluate_with(&|name| bindings.get(name).copied())
    }

    /// Evaluates with a caller-supplied variable lookup.
    pub fn evaluate_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, EvalError> {
        Ok(match self {
            Const(c) => *c,
            Var(name) => lookup(name).ok_or_else(|| EvalError::UnboundVariable(name.clone()))?,
            Add(terms) => {
                let mut sum = 0.0;
                for t in terms {
                    sum += t.evaluate_with(lookup)?;
                }
                sum
            }
            Mul(factors) => {
                let mut product = 1.0;
                for f in factors {
                    product *= f.evaluate_with(lookup)?;
                }
                product
            }
            Neg(a) => -a.evaluate_with(lookup)?,
            Div(n, d) => {
                let num = n.evaluate_with(lookup)?;
                let den = d.evaluate_with(lookup)?;
                if den.abs() <= DIVISION_TOL {
                    return Err(EvalError::DomainError("division by zero".into()));
                }
                num / den
            }
            Pow(b, n) => {
                let base = b.evaluate_with(lookup)?;
                if *n < 0 && base.abs() <= DIVISION_TOL {
                    return Err(EvalError::DomainError("negative power of zero".into()));
                }
                base.powi(*n)
            }
            Sqrt(a) => checked_sqrt(a.evaluate_with(lookup)?)?,
            Abs(a) => a.evaluate_with(lookup)?.abs(),
            Sin(a) => a.evaluate_with(lookup)?.sin(),
            Cos(a) => a.evaluate_with(lookup)?.cos(),
        })
    }

    /// Free variables in order of first occurrence (left-to-right walk).
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Const(_) => {}
            Var(name) => {
                if !out.iter().any(|n| n == name) {
                    out.push(name.clone());
                }
            }
            Add(children) | Mul(children) => children.iter().for_each(|c| c.collect_vars(out)),
            Div(n, d) => {
                n.collect_vars(out);
                d.collect_vars(out);
            }
            Neg(a) | Pow(a, _) | Sqrt(a) | Abs(a) | Sin(a) | Cos(a) => a.collect_vars(out),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Const(_) | Var(_) => 1,
            Add(children) | Mul(children) => 1 + children.iter().map(Self::size).sum::<usize>(),
            Div(n, d) => 1 + n.size() + d.size(),
            Neg(a) | Pow(a, _) | Sqrt(a) | Abs(a) | Sin(a) | Cos(a) => 1 + a.size(),
        }
    }
}

/// Square root that tolerates round-off just below zero.
pub fn checked_sqrt(value: f64) -> Result<f64, EvalError> {
    if value >= 0.0 {
        Ok(value.sqrt())
    } else if value >= -ZERO_TOL {
        Ok(0.0)
    } else {
        Err(EvalError::DomainError(format!(
            "square root of negative value {value}"
        )))
    }
}

fn is_zero_const(e: &ScalarExpr) -> bool {
    matches!(e, Const(c) if *c == 0.0)
}

/// Canonical negation.
fn negate(e: ScalarExpr) -> ScalarExpr {
    match e {
        Const(c) => Const(-c),
        Neg(a) => *a,
        Add(terms) => fold_add(terms.into_iter().map(negate).collect()),
        Mul(mut factors) => match factors.first() {
            Some(Const(c)) => {
                let c = -*c;
                if c == 1.0 {
                    factors.remove(0);
                    if factors.len() == 1 {
                        factors.pop().unwrap()
                    } else {
                        Mul(factors)
                    }
                } else {
                    factors[0] = Const(c);
                    Mul(factors)
                }
            }
            _ => Neg(Box::new(Mul(factors))),
        },
        other => Neg(Box::new(other)),
    }
}

fn fold_add(terms: Vec<ScalarExpr>) -> ScalarExpr {
    let mut flat = Vec::with_capacity(terms.len());
    for t in terms {
        match t {
            Add(inner) => flat.extend(inner),
            other => flat.push(other),
        }
    }
    let mut constant = 0.0;
    let mut kept: Vec<ScalarExpr> = Vec::with_capacity(flat.len());
    for t in flat {
        if let Const(c) = t {
            constant += c;
            continue;
        }
        let negated = negate(t.clone());
        if let Some(pos) = kept.iter().position(|k| *k == negated) {
            kept.remove(pos);
        } else {
            kept.push(t);
        }
    }
    if constant != 0.0 {
        kept.push(Const(constant));
    }
    match kept.len() {
        0 => Const(0.0),
        1 => kept.pop().unwrap(),
        _ => Add(kept),
    }
}

fn fold_mul(factors: Vec<ScalarExpr>) -> ScalarExpr {
    let mut constant = 1.0;
    let mut bases: Vec<(ScalarExpr, i32)> = Vec::new();
    let mut stack: Vec<ScalarExpr> = factors.into_iter().rev().collect();
    while let Some(f) = stack.pop() {
        match f {
            Const(c) => constant *= c,
            Neg(a) => {
                constant = -constant;
                stack.push(*a);
            }
            Mul(inner) => stack.extend(inner.into_iter().rev()),
            other => {
                let (base, exp) = match other {
                    Pow(b, n) => (*b, n),
                    b => (b, 1),
                };
                match bases.iter_mut().find(|(b, _)| *b == base) {
                    Some(entry) => entry.1 += exp,
                    None => bases.push((base, exp)),
                }
            }
        }
    }
    if constant == 0.0 {
        return Const(0.0);
    }
    let mut body: Vec<ScalarExpr> = bases
        .into_iter()
        .filter(|(_, n)| *n != 0)
        .map(|(b, n)| fold_pow(b, n))
        .collect();
    // a merged power can fold to a constant, e.g. a power of a constant
    if body.iter().any(|f| matches!(f, Const(_) | Mul(_) | Neg(_))) {
        let mut all = vec![Const(constant)];
        all.extend(body);
        return fold_mul(all);
    }
    match body.len() {
        0 => Const(constant),
        _ if constant == 1.0 => {
            if body.len() == 1 {
                body.pop().unwrap()
            } else {
                Mul(body)
            }
        }
        _ if constant == -1.0 => negate(if body.len() == 1 {
            body.pop().unwrap()
        } else {
            Mul(body)
        }),
        _ => {
            body.insert(0, Const(constant));
            Mul(body)
        }
    }
}

fn fold_div(n: ScalarExpr, d: ScalarExpr) -> ScalarExpr {
    match (n, d) {
        (n, Const(1.0)) => n,
        (n, Const(-1.0)) => negate(n),
        (Const(a), Const(b)) if b != 0.0 => Const(a / b),
        (n, d) if is_zero_const(&n) && !is_zero_const(&d) => Const(0.0),
        (Neg(a), d) => negate(fold_div(*a, d)),
        (n, Neg(b)) => negate(fold_div(n, *b)),
        (n, d) if n == d && !is_zero_const(&d) => Const(1.0),
        (n, d) => Div(Box::new(n), Box::new(d)),
    }
}

fn fold_pow(base: ScalarExpr, exponent: i32) -> ScalarExpr {
    match (base, exponent) {
        (_, 0) => Const(1.0),
        (b, 1) => b,
        (Const(c), n) if c != 0.0 || n > 0 => Const(c.powi(n)),
        (Pow(b, m), n) => fold_pow(*b, m.saturating_mul(n)),
        (Neg(a), n) if n % 2 == 0 => fold_pow(*a, n),
        (Neg(a), n) => negate(fold_pow(*a, n)),
        (b, n) => Pow(Box::new(b), n),
    }
}

fn fold_sqrt(a: ScalarExpr) -> ScalarExpr {
    match a {
        Const(c) if c >= 0.0 => Const(c.sqrt()),
        Pow(b, 2) => fold_abs(*b),
        other => Sqrt(Box::new(other)),
    }
}

fn fold_abs(a: ScalarExpr) -> ScalarExpr {
    match a {
        Const(c) => Const(c.abs()),
        Neg(inner) => fold_abs(*inner),
        Abs(inner) => Abs(inner),
        Sqrt(inner) => Sqrt(inner),
        Pow(b, n) if n % 2 == 0 => Pow(b, n),
        other => Abs(Box::new(other)),
    }
}

fn fold_sin(a: ScalarExpr) -> ScalarExpr {
    match a {
        Const(c) => Const(c.sin()),
        Neg(inner) => negate(fold_sin(*inner)),
        other => Sin(Box::new(other)),
    }
}

fn fold_cos(a: ScalarExpr) -> ScalarExpr {
    match a {
        Const(c) => Const(c.cos()),
        Neg(inner) => fold_cos(*inner),
        other => Cos(Box::new(other)),
    }
}

impl Add for ScalarExpr {
    type Output = ScalarExpr;
    fn add(self, rhs: Self) -> Self {
        fold_add(vec![self, rhs])
    }
}

impl Sub for ScalarExpr {
    type Output = ScalarExpr;
    fn sub(self, rhs: Self) -> Self {
        fold_add(vec![self, negate(rhs)])
    }
}

impl Mul for ScalarExpr {
    type Output = ScalarExpr;
    fn mul(self, rhs: Self) -> Self {
        fold_mul(vec![self, rhs])
    }
}

impl Div for ScalarExpr {
    type Output = ScalarExpr;
    fn div(self, rhs: Self) -> Self {
        fold_div(self, rhs)
    }
}

impl Neg for ScalarExpr {
    type Output = ScalarExpr;
    fn neg(self) -> Self {
        negate(self)
    }
}

impl From<f64> for ScalarExpr {
    fn from(value: f64) -> Self {
        Const(value)
    }
}

impl Scalar for ScalarExpr {
    fn zero() -> Self {
        Const(0.0)
    }

    fn one() -> Self {
        Const(1.0)
    }

    fn from_f64(value: f64) -> Self {
        Const(value)
    }

    fn is_zero(&self) -> bool {
        matches!(self, Const(c) if c.abs() <= ZERO_TOL)
    }

    fn constant(&self) -> Option<f64> {
        self.as_const()
    }

    fn sqrt(self) -> Self {
        fold_sqrt(self)
    }

    fn abs(self) -> Self {
        fold_abs(self)
    }

    fn sin(self) -> Self {
        fold_sin(self)
    }

    fn cos(self) -> Self {
        fold_cos(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> ScalarExpr {
        ScalarExpr::var("x")
    }

    fn y() -> ScalarExpr {
        ScalarExpr::var("y")
    }

    fn raw_mul(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
        Mul(vec![a, b])
    }

    #[test]
    fn identities_vanish() {
        let e = Add(vec![raw_mul(Const(0.0), x()), raw_mul(Const(1.0), y())]);
        assert_eq!(e.simplify(), y());
    }

    #[test]
    fn constants_fold() {
        let e = raw_mul(Add(vec![Const(2.0), Const(3.0)]), x());
        assert_eq!(e.simplify(), Mul(vec![Const(5.0), x()]));
    }

    #[test]
    fn repeated_factor_becomes_power() {
        assert_eq!(raw_mul(x(), x()).simplify(), Pow(Box::new(x()), 2));
        let cubed = Mul(vec![x(), y(), Pow(Box::new(x()), 2)]).simplify();
        assert_eq!(cubed, Mul(vec![Pow(Box::new(x()), 3), y()]));
    }

    #[test]
    fn negation_is_pushed_and_cancels() {
        let e = Neg(Box::new(Add(vec![x(), Neg(Box::new(y()))])));
        assert_eq!(e.simplify(), Add(vec![Neg(Box::new(x())), y()]));
        assert_eq!((x() * y()) - (x() * y()), Const(0.0));
        assert_eq!(-(-x()), x());
        assert_eq!(Const(3.0) * x() * Const(-1.0), Mul(vec![Const(-3.0), x()]));
    }

    #[test]
    fn structurally_distinct_products_are_not_collected() {
        let e = (x() * y()) - (y() * x());
        assert_ne!(e, Const(0.0));
        let value = e.evaluate(&HashMap::from([("x".into(), 3.0), ("y".into(), 7.0)]));
        assert_eq!(value, Ok(0.0));
    }

    #[test]
    fn point_embedding_weight_evaluates() {
        let z = ScalarExpr::var("z");
        let e = Const(0.5) * (x().pow(2) + y().pow(2) + z.pow(2));
        let b = HashMap::from([("x".into(), 4.0), ("y".into(), 5.0), ("z".into(), 6.0)]);
        assert_eq!(e.evaluate(&b), Ok(38.5));
    }

    #[test]
    fn evaluation_errors() {
        assert_eq!(
            x().evaluate(&HashMap::new()),
            Err(EvalError::UnboundVariable("x".into()))
        );
        let b = HashMap::from([("x".into(), -4.0)]);
        assert!(matches!(
            x().sqrt().evaluate(&b),
            Err(EvalError::DomainError(_))
        ));
        let zero = HashMap::from([("x".into(), 0.0)]);
        assert!(matches!(
            (y() / x()).evaluate(&zero),
            Err(EvalError::UnboundVariable(_))
        ));
        let both = HashMap::from([("x".into(), 0.0), ("y".into(), 1.0)]);
        assert!(matches!(
            (y() / x()).evaluate(&both),
            Err(EvalError::DomainError(_))
        ));
        assert_eq!(x().evaluate(&HashMap::from([("x".into(), 2.0)])), Ok(2.0));
    }

    #[test]
    fn free_variables_in_first_occurrence_order() {
        let z = ScalarExpr::var("z");
        let e = Const(0.5) * (x().pow(2) + y().pow(2) + z.pow(2));
        assert_eq!(e.free_vars(), vec!["x", "y", "z"]);
        assert!(Const(3.0).free_vars().is_empty());
        assert_eq!((x() + y() * x()).free_vars(), vec!["x", "y"]);
    }

    #[test]
    fn division_rules() {
        assert_eq!(x() / Const(1.0), x());
        assert_eq!(Const(0.0) / x(), Const(0.0));
        assert_eq!(x() / x(), Const(1.0));
        assert_eq!(
            (-x()) / y(),
            Neg(Box::new(Div(Box::new(x()), Box::new(y()))))
        );
    }

    #[test]
    fn sqrt_of_square_is_abs() {
        assert_eq!(x().pow(2).sqrt(), Abs(Box::new(x())));
        assert_eq!(Const(9.0).sqrt(), Const(3.0));
        assert_eq!(Scalar::abs(-x()), Abs(Box::new(x())));
    }

    #[test]
    fn simplify_mul_with_merged_constant_power() {
        let e = Mul(vec![Const(2.0), Pow(Box::new(Const(3.0)), 2), x()]);
        assert_eq!(e.simplify(), Mul(vec![Const(18.0), x()]));
    }
}
