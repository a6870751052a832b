use gavis::algebra::Multivector;
use gavis::cga::{
    classify, embed_point, extract_point, intersect_ipns, point_pair_split, rotor, sphere_ipns,
    translator, EuclidPoint, GeometricObject,
};
use proptest::prelude::*;

fn point(bound: f64) -> impl Strategy<Value = EuclidPoint> {
    prop::array::uniform3(-bound..bound).prop_map(|[x, y, z]| EuclidPoint::new(x, y, z))
}

fn unit() -> impl Strategy<Value = EuclidPoint> {
    point(1.0)
        .prop_filter("non-zero", |p| p.norm() > 1e-3)
        .prop_map(|p| p.scale(1.0 / p.norm()))
}

fn e(i: usize) -> Multivector {
    Multivector::basis(gavis::algebra::Signature::cga3d(), i)
}

fn versor() -> impl Strategy<Value = Multivector> {
    let rot = (0usize..3, -3.0..3.0f64).prop_map(|(plane, angle)| {
        let (a, b) = [(1, 2), (2, 3), (3, 1)][plane];
        rotor(&e(a).wedge(&e(b)).unwrap(), angle).unwrap()
    });
    let trans = point(5.0).prop_map(translator);
    prop::collection::vec(prop_oneof![rot, trans], 1..4)
        .prop_map(|vs| vs.into_iter().reduce(|a, b| a.gp(&b).unwrap()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn embedding_round_trips(p in point(10.0)) {
        let back = extract_point(&embed_point(p)).unwrap();
        prop_assert!(back.distance(&p) <= 1e-12);
    }

    #[test]
    fn embedded_points_are_null(p in point(10.0)) {
        let mv = embed_point(p);
        let square = mv.gp(&mv).unwrap();
        // Relative to the squared coefficients, whose rounding dominates for large |p|.
        let scale: f64 = mv.dense().iter().map(|c| c * c).sum::<f64>().max(1.0);
        prop_assert!(square.terms().all(|(_, c)| c.abs() <= 1e-12 * scale), "{square}");
    }

    #[test]
    fn surface_points_lie_on_the_sphere(c in point(5.0), r in 0.1..5.0f64, u in unit()) {
        let on = EuclidPoint::new(c.x + r * u.x, c.y + r * u.y, c.z + r * u.z);
        let inner = embed_point(on).lcont(&sphere_ipns(c, r)).unwrap();
        prop_assert!(inner.scalar_part().abs() <= 1e-10);
    }

    #[test]
    fn versors_preserve_distances(v in versor(), ps in prop::collection::vec(point(5.0), 2..5)) {
        let moved: Vec<EuclidPoint> = ps
            .iter()
            .map(|p| extract_point(&Multivector::sandwich(&v, &embed_point(*p)).unwrap()).unwrap())
            .collect();
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                prop_assert!((ps[i].distance(&ps[j]) - moved[i].distance(&moved[j])).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn sphere_classification_recovers_parameters(c in point(5.0), r in 0.1..5.0f64) {
        match classify(&sphere_ipns(c, r)) {
            GeometricObject::Sphere { center, radius } => {
                prop_assert!(center.distance(&c) <= 1e-9);
                prop_assert!((radius - r).abs() <= 1e-9);
            }
            other => prop_assert!(false, "{other:?}"),
        }
    }

    #[test]
    fn split_points_lie_on_every_sphere(
        target in point(2.0),
        offsets in prop::array::uniform3(point(2.0)),
    ) {
        // Spheres through a common point meet in a real pair.
        let spheres: Vec<(EuclidPoint, f64)> = offsets
            .iter()
            .map(|o| {
                let c = EuclidPoint::new(target.x + o.x, target.y + o.y, target.z + o.z);
                (c, c.distance(&target))
            })
            .collect();
        let centers: Vec<EuclidPoint> = spheres.iter().map(|s| s.0).collect();
        let normal = (centers[1] - centers[0]).cross(&(centers[2] - centers[0]));
        prop_assume!(normal.norm() > 0.1 && spheres.iter().all(|s| s.1 > 0.1));
        let ipns: Vec<Multivector> = spheres.iter().map(|(c, r)| sphere_ipns(*c, *r)).collect();
        let (a, b) = point_pair_split(&intersect_ipns(&ipns).unwrap()).unwrap();
        for (c, r) in &spheres {
            prop_assert!((a.distance(c) - r).abs() <= 1e-9);
            prop_assert!((b.distance(c) - r).abs() <= 1e-9);
        }
        prop_assert!(a.distance(&target) <= 1e-6 || b.distance(&target) <= 1e-6);
    }
}

#[test]
fn worked_configuration_matches_elimination() {
    let spheres = [
        (EuclidPoint::new(0.0, 0.0, 0.0), 0.5),
        (EuclidPoint::new(0.0, 0.4, 0.0), 0.4),
        (EuclidPoint::new(0.0, 0.45, 0.2), 0.3),
    ];
    // Subtracting sphere equations pairwise leaves linear equations in y and z.
    let y = 0.25 / 0.8;
    let z = (0.25 - 0.09 + 0.45f64.powi(2) + 0.2f64.powi(2) - 0.9 * y) / 0.4;
    let x = (0.25 - y * y - z * z).sqrt();
    assert!((y - 0.3125).abs() <= 1e-15 && (z - 0.303125).abs() <= 1e-15);
    let ipns: Vec<Multivector> = spheres.iter().map(|(c, r)| sphere_ipns(*c, *r)).collect();
    let (a, b) = point_pair_split(&intersect_ipns(&ipns).unwrap()).unwrap();
    let mut xs = [a.x, b.x];
    xs.sort_by(f64::total_cmp);
    for (p, expected_x) in [a, b].iter().zip([-x, x]) {
        assert!((p.y - y).abs() <= 1e-9 && (p.z - z).abs() <= 1e-9);
        assert!(xs.iter().any(|v| (v - expected_x).abs() <= 1e-9));
    }
}
