use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, BitXor, Mul, Neg, Sub};

use super::{basis_product, AlgebraError, Blade, Scalar, Signature, ZERO_TOL};

/// Sparse multivector: a map from basis blade to coefficient.
///
/// Terms whose coefficient [`Scalar::is_zero`] are never stored, so two
/// multivectors of the same algebra compare equal exactly when their stored
/// terms do.
#[derive(Debug, Clone, PartialEq)]
pub struct Multivector<S = f64> {
    sig: Signature,
    terms: BTreeMap<Blade, S>,
}

impl<S: Scalar> Multivector<S> {
    pub fn zero(sig: Signature) -> Self {
        Self {
            sig,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(sig: Signature, value: S) -> Self {
        Self::from_terms(sig, [(Blade::SCALAR, value)])
    }

    /// The 1-based basis vector `e{index}`.
    pub fn basis(sig: Signature, index: usize) -> Self {
        Self::blade(sig, Blade::basis(index), S::one())
    }

    pub fn blade(sig: Signature, blade: Blade, value: S) -> Self {
        Self::from_terms(sig, [(blade, value)])
    }

    /// Builds a multivector, summing repeated blades and pruning zeros.
    ///
    /// Panics if a blade does not fit the algebra.
    pub fn from_terms(sig: Signature, terms: impl IntoIterator<Item = (Blade, S)>) -> Self {
        let mut mv = Self::zero(sig);
        for (blade, value) in terms {
            assert!(
                blade.is_valid_for(sig),
                "blade {blade} is not part of {sig}"
            );
            mv.accumulate(blade, value);
        }
        mv
    }

    /// Adds `value` onto the coefficient of `blade`, keeping canonical form.
    pub fn accumulate(&mut self, blade: Blade, value: S) {
        let next = match self.terms.remove(&blade) {
            Some(current) => current + value,
            None => value,
        };
        if !next.is_zero() {
            self.terms.insert(blade, next);
        }
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, blade: Blade) -> Option<&S> {
        self.terms.get(&blade)
    }

    /// Coefficient of `blade`, zero when absent.
    pub fn coefficient(&self, blade: Blade) -> S {
        self.terms.get(&blade).cloned().unwrap_or_else(S::zero)
    }

    pub fn scalar_part(&self) -> S {
        self.coefficient(Blade::SCALAR)
    }

    /// Stored terms in ascending bitmask order.
    pub fn terms(&self) -> impl Iterator<Item = (Blade, &S)> {
        self.terms.iter().map(|(b, s)| (*b, s))
    }

    pub fn blades(&self) -> impl Iterator<Item = Blade> + '_ {
        self.terms.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sorted list of grades that have at least one stored term.
    pub fn grades(&self) -> Vec<usize> {
        let mut grades: Vec<usize> = self.terms.keys().map(|b| b.grade()).collect();
        grades.sort_unstable();
        grades.dedup();
        grades
    }

    /// The single grade of a homogeneous multivector, `None` when mixed or zero.
    pub fn homogeneous_grade(&self) -> Option<usize> {
        match self.grades().as_slice() {
            [g] => Some(*g),
            _ => None,
        }
    }

    pub fn map(&self, mut f: impl FnMut(Blade, &S) -> S) -> Self {
        Self::from_terms(self.sig, self.terms.iter().map(|(b, s)| (*b, f(*b, s))))
    }

    pub fn scale(&self, factor: &S) -> Self {
        self.map(|_, s| s.clone() * factor.clone())
    }

    fn check_same(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.sig == other.sig {
            Ok(())
        } else {
            Err(AlgebraError::AlgebraMismatch {
                left: self.sig.name(),
                right: other.sig.name(),
            })
        }
    }

    fn product_where(
        &self,
        other: &Self,
        keep: impl Fn(Blade, Blade, Blade) -> bool,
    ) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        let mut out = Self::zero(self.sig);
        for (&a, x) in &self.terms {
            for (&b, y) in &other.terms {
                let (sign, blade) = basis_product(a, b, self.sig);
                if sign == 0 || !keep(a, b, blade) {
                    continue;
                }
                let value = x.clone() * y.clone();
                out.accumulate(blade, if sign < 0 { -value } else { value });
            }
        }
        Ok(out)
    }

    /// Geometric product.
    pub fn gp(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.product_where(other, |_, _, _| true)
    }

    /// Outer (wedge) product: grade `r + s` part of each blade product.
    pub fn wedge(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.product_where(other, |a, b, _| a.bits() & b.bits() == 0)
    }

    /// Left contraction: grade `s - r` part of each blade product, zero when `r > s`.
    pub fn lcont(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.product_where(other, |a, b, r| {
            b.grade() >= a.grade() && r.grade() == b.grade() - a.grade()
        })
    }

    /// Scalar part of the geometric product, `<a b>_0`.
    pub fn scalar_product(&self, other: &Self) -> Result<S, AlgebraError> {
        Ok(self
            .product_where(other, |_, _, r| r == Blade::SCALAR)?
            .scalar_part())
    }

    pub fn grade_part(&self, grade: usize) -> Self {
        Self {
            sig: self.sig,
            terms: self
                .terms
                .iter()
                .filter(|(b, _)| b.grade() == grade)
                .map(|(b, s)| (*b, s.clone()))
                .collect(),
        }
    }

    /// Reverse: grade `k` is multiplied by `(-1)^(k(k-1)/2)`.
    pub fn reverse(&self) -> Self {
        self.map(|b, s| {
            if reverse_sign(b.grade()) < 0 {
                -s.clone()
            } else {
                s.clone()
            }
        })
    }

    /// Grade involution: grade `k` is multiplied by `(-1)^k`.
    pub fn involute(&self) -> Self {
        self.map(|b, s| {
            if b.grade() % 2 == 1 {
                -s.clone()
            } else {
                s.clone()
            }
        })
    }

    /// `sqrt(|<a ~a>_0|)`.
    pub fn norm(&self) -> S {
        self.scalar_product(&self.reverse())
            .expect("same algebra")
            .abs()
            .sqrt()
    }

    pub fn normalize(&self) -> Result<Self, AlgebraError> {
        let norm = self.norm();
        if norm.is_zero() || norm.constant().is_some_and(|n| n <= ZERO_TOL) {
            return Err(AlgebraError::ZeroNorm);
        }
        Ok(self.scale(&(S::one() / norm)))
    }

    /// Blade/versor inverse `~a / <a ~a>_0`.
    ///
    /// Fails when `a ~a` is not a scalar or its magnitude is at most the zero
    /// tolerance.
    pub fn inverse(&self) -> Result<Self, AlgebraError> {
        let reversed = self.reverse();
        let square = self.gp(&reversed)?;
        if square.terms.keys().any(|b| *b != Blade::SCALAR) {
            return Err(AlgebraError::NotInvertible);
        }
        let s = square.scalar_part();
        if s.is_zero() {
            return Err(AlgebraError::NotInvertible);
        }
        Ok(reversed.scale(&(S::one() / s)))
    }

    pub fn pseudoscalar(sig: Signature) -> Self {
        Self::blade(sig, Blade::pseudoscalar(sig), S::one())
    }

    /// `a ⌋ I⁻¹`, with `I` the unit pseudoscalar.
    pub fn dual(&self) -> Result<Self, AlgebraError> {
        if self.sig.is_degenerate() {
            return Err(AlgebraError::DegenerateMetric);
        }
        let inv = Self::pseudoscalar(self.sig).inverse()?;
        self.lcont(&inv)
    }

    /// Inverse of [`dual`](Self::dual): `a ⌋ I`.
    pub fn undual(&self) -> Result<Self, AlgebraError> {
        if self.sig.is_degenerate() {
            return Err(AlgebraError::DegenerateMetric);
        }
        self.lcont(&Self::pseudoscalar(self.sig))
    }

    /// Versor action `v a v⁻¹`.
    pub fn sandwich(versor: &Self, a: &Self) -> Result<Self, AlgebraError> {
        versor.gp(a)?.gp(&versor.inverse()?)
    }
}

/// `(-1)^(k(k-1)/2)`.
pub fn reverse_sign(grade: usize) -> i8 {
    if (grade * grade.saturating_sub(1) / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

impl Multivector<f64> {
    /// Closed-form exponential of a bivector whose square is a scalar.
    pub fn exp_bivector(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Ok(Self::scalar(self.sig, 1.0));
        }
        if self.homogeneous_grade() != Some(2) {
            return Err(AlgebraError::NonScalarSquare);
        }
        let square = self.gp(self)?;
        if square.terms.keys().any(|b| *b != Blade::SCALAR) {
            return Err(AlgebraError::NonScalarSquare);
        }
        let s = square.scalar_part();
        let one = Self::scalar(self.sig, 1.0);
        let out = if s.abs() <= ZERO_TOL {
            one + self.clone()
        } else if s < 0.0 {
            let theta = (-s).sqrt();
            Self::scalar(self.sig, theta.cos()) + self.scale(&(theta.sin() / theta))
        } else {
            let theta = s.sqrt();
            Self::scalar(self.sig, theta.cosh()) + self.scale(&(theta.sinh() / theta))
        };
        Ok(out)
    }

    /// Largest absolute coefficient difference against `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut blades: Vec<Blade> = self.blades().chain(other.blades()).collect();
        blades.sort_unstable();
        blades.dedup();
        blades
            .into_iter()
            .map(|b| (self.coefficient(b) - other.coefficient(b)).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.sig == other.sig && self.max_abs_diff(other) <= tol
    }

    /// Coefficients for every blade of the algebra in ascending bitmask order.
    pub fn dense(&self) -> Vec<f64> {
        (0..self.sig.blade_count())
            .map(|i| self.coefficient(Blade(i as u16)))
            .collect()
    }

    pub fn from_dense(sig: Signature, coefficients: &[f64]) -> Self {
        Self::from_terms(
            sig,
            coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| (Blade(i as u16), *c)),
        )
    }
}

impl fmt::Display for Multivector<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (blade, value)) in self.terms.iter().enumerate() {
            let (sep, magnitude) = match (i, *value < 0.0) {
                (0, true) => ("-", -value),
                (0, false) => ("", *value),
                (_, true) => (" - ", -value),
                (_, false) => (" + ", *value),
            };
            f.write_str(sep)?;
            if *blade == Blade::SCALAR {
                write!(f, "{magnitude}")?;
            } else {
                write!(f, "{magnitude}*{blade}")?;
            }
        }
        Ok(())
    }
}

impl<S: Scalar> Add for Multivector<S> {
    type Output = Multivector<S>;

    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.sig, rhs.sig, "algebra mismatch in addition");
        for (blade, value) in rhs.terms {
            self.accumulate(blade, value);
        }
        self
    }
}

impl<S: Scalar> Sub for Multivector<S> {
    type Output = Multivector<S>;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<S: Scalar> Neg for Multivector<S> {
    type Output = Multivector<S>;

    fn neg(self) -> Self {
        self.map(|_, s| -s.clone())
    }
}

impl<S: Scalar> Mul for &Multivector<S> {
    type Output = Multivector<S>;

    /// Geometric product; panics on mismatched algebras.
    fn mul(self, rhs: Self) -> Multivector<S> {
        self.gp(rhs).expect("algebra mismatch in geometric product")
    }
}

impl<S: Scalar> BitXor for &Multivector<S> {
    type Output = Multivector<S>;

    /// Outer product; panics on mismatched algebras.
    fn bitxor(self, rhs: Self) -> Multivector<S> {
        self.wedge(rhs).expect("algebra mismatch in outer product")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn e(sig: Signature, i: usize) -> Multivector {
        Multivector::basis(sig, i)
    }

    fn e12() -> Multivector {
        Multivector::blade(Signature::euclid3d(), Blade(0b11), 1.0)
    }

    #[test]
    fn products_of_basis_vectors() {
        let sig = Signature::euclid3d();
        assert_eq!(&e(sig, 1) * &e(sig, 2), e12());
        let v = e(sig, 1) + e(sig, 2);
        assert_eq!(&v * &v, Multivector::scalar(sig, 2.0));
        assert!((&e(sig, 1) ^ &e(sig, 1)).is_zero());
        assert_eq!(&e(sig, 1) ^ &e(sig, 2), e12());
    }

    #[test]
    fn contraction_of_vector_onto_bivector() {
        let sig = Signature::euclid3d();
        assert_eq!(e(sig, 1).lcont(&e12()).unwrap(), e(sig, 2));
        assert!(e12().lcont(&e(sig, 1)).unwrap().is_zero());
    }

    #[test]
    fn algebra_mismatch_is_reported() {
        let a = e(Signature::euclid3d(), 1);
        let b = e(Signature::cga3d(), 1);
        assert!(matches!(
            a.gp(&b),
            Err(AlgebraError::AlgebraMismatch { .. })
        ));
    }

    #[test]
    fn grade_selection() {
        let sig = Signature::euclid3d();
        let m = Multivector::scalar(sig, 1.0) + e(sig, 1) + e12();
        assert_eq!(m.grade_part(1), e(sig, 1));
        assert!(e12().grade_part(0).is_zero());
        assert_eq!(m.grades(), vec![0, 1, 2]);
    }

    #[test]
    fn reverse_signs() {
        let sig = Signature::euclid3d();
        assert_eq!(e(sig, 1).reverse(), e(sig, 1));
        assert_eq!(e12().reverse(), -e12());
        let signs: Vec<i8> = (0..6).map(reverse_sign).collect();
        assert_eq!(signs, vec![1, 1, -1, -1, 1, 1]);
    }

    #[test]
    fn norms() {
        let sig = Signature::euclid3d();
        assert_eq!(e(sig, 1).scale(&3.0).norm(), 3.0);
        let cga = Signature::cga3d();
        let einf = e(cga, 4) + e(cga, 5);
        assert!(einf.norm().abs() < 1e-15);
        assert_eq!(einf.normalize(), Err(AlgebraError::ZeroNorm));
    }

    #[test]
    fn inverses() {
        let sig = Signature::euclid3d();
        assert_eq!(e(sig, 1).inverse().unwrap(), e(sig, 1));
        let two_e12 = e12().scale(&2.0);
        assert_eq!(two_e12.inverse().unwrap(), e12().scale(&-0.5));
        let mixed = e(sig, 1) + e12();
        assert_eq!(mixed.inverse(), Err(AlgebraError::NotInvertible));
        assert_eq!(
            Multivector::<f64>::zero(sig).inverse(),
            Err(AlgebraError::NotInvertible)
        );
    }

    #[test]
    fn duality_in_euclidean_space() {
        let sig = Signature::euclid3d();
        let one = Multivector::scalar(sig, 1.0);
        // e123⁻¹ = -e123 in Cl(3,0)
        assert_eq!(
            one.dual().unwrap(),
            Multivector::pseudoscalar(sig).scale(&-1.0)
        );
        let i = Multivector::pseudoscalar(sig);
        assert_eq!(i.dual().unwrap(), one);
        let a = e(sig, 1).scale(&2.0) + e12();
        assert!(a.dual().unwrap().undual().unwrap().approx_eq(&a, 1e-15));
        // dual∘dual = -1 on Cl(3,0)
        assert!(a.dual().unwrap().dual().unwrap().approx_eq(&-a, 1e-15));
    }

    #[test]
    fn sandwich_identity_and_rotation() {
        let sig = Signature::euclid3d();
        let one = Multivector::scalar(sig, 1.0);
        let a = e(sig, 1) + e12();
        assert_eq!(Multivector::sandwich(&one, &a).unwrap(), a);
        let rotor = Multivector::scalar(sig, (PI / 4.0).cos()) - e12().scale(&(PI / 4.0).sin());
        let rotated = Multivector::sandwich(&rotor, &e(sig, 1)).unwrap();
        assert!(rotated.approx_eq(&e(sig, 2), 1e-15), "{rotated}");
    }

    #[test]
    fn bivector_exponential_branches() {
        let sig = Signature::euclid3d();
        assert_eq!(
            Multivector::<f64>::zero(sig).exp_bivector().unwrap(),
            Multivector::scalar(sig, 1.0)
        );
        let quarter = e12().scale(&FRAC_PI_2).exp_bivector().unwrap();
        assert!(quarter.approx_eq(&e12(), 1e-15), "{quarter}");
        let cga = Signature::cga3d();
        let einf = e(cga, 4) + e(cga, 5);
        let b = (&e(cga, 1) ^ &einf).scale(&-0.5);
        let t = b.exp_bivector().unwrap();
        assert!(t.approx_eq(&(Multivector::scalar(cga, 1.0) + b), 1e-15));
        let boost = (&e(cga, 4) ^ &e(cga, 5))
            .scale(&0.3)
            .exp_bivector()
            .unwrap();
        assert!((boost.scalar_part() - 0.3f64.cosh()).abs() < 1e-15);
        assert_eq!(
            (e12() + Multivector::scalar(sig, 1.0)).exp_bivector(),
            Err(AlgebraError::NonScalarSquare)
        );
    }

    #[test]
    fn display_is_readable() {
        let sig = Signature::euclid3d();
        let m = Multivector::scalar(sig, 1.5) - e(sig, 1) + e12().scale(&2.0);
        assert_eq!(m.to_string(), "1.5 - 1*e1 + 2*e12");
    }
}
