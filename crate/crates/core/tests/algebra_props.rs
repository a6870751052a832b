use gavis::algebra::{reverse_sign, Blade, Multivector, Signature};
use gavis::cga::project;
use proptest::prelude::*;

mod common;
use common::{oracle_gp, squares};

fn sig_e3() -> Signature {
    Signature::euclid3d()
}

fn sig_cga() -> Signature {
    Signature::cga3d()
}

fn coeff() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

fn dense(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(coeff(), 1 << n)
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(coeff(), n)
}

fn vector_mv(sig: Signature, c: &[f64]) -> Multivector {
    Multivector::from_terms(
        sig,
        c.iter().enumerate().map(|(i, v)| (Blade::basis(i + 1), *v)),
    )
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) -> Result<(), TestCaseError> {
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        prop_assert!((x - y).abs() <= tol, "blade {k}: {x} vs {y}");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gp_matches_cayley_oracle_euclidean(a in dense(3), b in dense(3)) {
        let s = sig_e3();
        let got = Multivector::from_dense(s, &a).gp(&Multivector::from_dense(s, &b)).unwrap();
        assert_close(&got.dense(), &oracle_gp(&a, &b, &squares(s)), 1e-12)?;
    }

    #[test]
    fn gp_matches_cayley_oracle_conformal(a in dense(5), b in dense(5)) {
        let s = sig_cga();
        let got = Multivector::from_dense(s, &a).gp(&Multivector::from_dense(s, &b)).unwrap();
        assert_close(&got.dense(), &oracle_gp(&a, &b, &squares(s)), 1e-12)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn gp_is_associative(a in dense(5), b in dense(5), c in dense(5)) {
        let s = sig_cga();
        let (a, b, c) = (Multivector::from_dense(s, &a), Multivector::from_dense(s, &b), Multivector::from_dense(s, &c));
        let left = a.gp(&b).unwrap().gp(&c).unwrap();
        let right = a.gp(&b.gp(&c).unwrap()).unwrap();
        prop_assert!(left.approx_eq(&right, 1e-10));
    }

    #[test]
    fn gp_distributes_over_addition(a in dense(5), b in dense(5), c in dense(5)) {
        let s = sig_cga();
        let (a, b, c) = (Multivector::from_dense(s, &a), Multivector::from_dense(s, &b), Multivector::from_dense(s, &c));
        let left = a.gp(&(b.clone() + c.clone())).unwrap();
        let right = a.gp(&b).unwrap() + a.gp(&c).unwrap();
        prop_assert!(left.approx_eq(&right, 1e-12));
    }

    #[test]
    fn reverse_is_an_anti_automorphism(a in dense(5), b in dense(5)) {
        let s = sig_cga();
        let (a, b) = (Multivector::from_dense(s, &a), Multivector::from_dense(s, &b));
        let left = a.gp(&b).unwrap().reverse();
        let right = b.reverse().gp(&a.reverse()).unwrap();
        prop_assert!(left.approx_eq(&right, 1e-12));
    }

    #[test]
    fn vector_product_splits_into_contraction_and_wedge(a in vector(5), b in vector(5)) {
        let s = sig_cga();
        let (a, b) = (vector_mv(s, &a), vector_mv(s, &b));
        let rest = a.gp(&b).unwrap() - a.lcont(&b).unwrap() - a.wedge(&b).unwrap();
        prop_assert!(rest.approx_eq(&Multivector::zero(s), 1e-12));
    }

    #[test]
    fn normalize_gives_unit_norm_euclidean(a in dense(3)) {
        if let Ok(n) = Multivector::from_dense(sig_e3(), &a).normalize() {
            prop_assert!((n.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn normalize_gives_unit_norm_conformal(a in dense(5)) {
        let a = Multivector::from_dense(sig_cga(), &a);
        // Mixed-sign squares can cancel; keep inputs within a factor 10 of the Euclidean magnitude.
        let magnitude: f64 = a.dense().iter().map(|c| c * c).sum();
        prop_assume!(a.norm().powi(2) >= magnitude / 10.0);
        let n = a.normalize().unwrap();
        prop_assert!((n.norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn inverse_is_a_right_inverse(v in vector(5), w in vector(5)) {
        let s = sig_cga();
        let versor = vector_mv(s, &v).gp(&vector_mv(s, &w)).unwrap();
        if let Ok(inv) = versor.inverse() {
            let one = versor.gp(&inv).unwrap();
            prop_assert!(one.approx_eq(&Multivector::scalar(s, 1.0), 1e-10));
        }
    }

    #[test]
    fn projection_onto_a_blade_is_idempotent(a in vector(5), factors in prop::collection::vec(vector(5), 1..4)) {
        let s = sig_cga();
        let mut blade = Multivector::scalar(s, 1.0);
        for f in &factors {
            blade = blade.wedge(&vector_mv(s, f)).unwrap();
        }
        let weight = blade.gp(&blade.reverse()).unwrap().scalar_part().abs();
        prop_assume!(weight > 1e-2);
        let a = vector_mv(s, &a);
        let once = project(&a, &blade).unwrap();
        let twice = project(&once, &blade).unwrap();
        prop_assert!(twice.approx_eq(&once, 1e-10));
    }
}

#[test]
fn reverse_sign_per_grade() {
    let s = sig_cga();
    for bits in 0..s.blade_count() as u16 {
        let blade = Blade(bits);
        let k = blade.grade() as i32;
        let expected = if (k * (k - 1) / 2) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        assert_eq!(reverse_sign(k as usize) as f64, expected);
        let reversed = Multivector::blade(s, blade, 1.0).reverse();
        assert_eq!(reversed.coefficient(blade), expected, "{blade}");
    }
}
