use std::sync::Arc;

use joint_spectrum::geometry::{
    asymptotic_cone, body_from_points, contains, hausdorff_distance, make_directions,
    DirectionSet,
};
use joint_spectrum::linalg::ChamberVector;
use proptest::prelude::*;

fn dirs3() -> Arc<DirectionSet> {
    Arc::new(make_directions(3, 48, 7).unwrap())
}

fn point() -> impl Strategy<Value = ChamberVector> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| ChamberVector::new(vec![a, b, -a - b]))
}

fn cloud() -> impl Strategy<Value = Vec<ChamberVector>> {
    prop::collection::vec(point(), 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hausdorff_is_a_pseudometric(a in cloud(), b in cloud(), c in cloud()) {
        let d = dirs3();
        let (a, b, c) = (
            body_from_points(&a, d.clone()).unwrap(),
            body_from_points(&b, d.clone()).unwrap(),
            body_from_points(&c, d).unwrap(),
        );
        let ab = hausdorff_distance(&a, &b).unwrap();
        prop_assert_eq!(ab, hausdorff_distance(&b, &a).unwrap());
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        let ac = hausdorff_distance(&a, &c).unwrap();
        let cb = hausdorff_distance(&c, &b).unwrap();
        prop_assert!(ab <= ac + cb + 1e-12);
    }

    #[test]
    fn hull_is_monotone(a in cloud(), extra in cloud()) {
        let d = dirs3();
        let small = body_from_points(&a, d.clone()).unwrap();
        let mut all = a.clone();
        all.extend(extra);
        let big = body_from_points(&all, d).unwrap();
        for (s, b) in small.support_values().iter().zip(big.support_values()) {
            prop_assert!(s <= b);
        }
    }

    #[test]
    fn convex_combinations_are_contained(a in cloud(), w in prop::collection::vec(0.0f64..1.0, 12)) {
        let body = body_from_points(&a, dirs3()).unwrap();
        let wit = body.witnesses();
        let w: Vec<f64> = w[..wit.len()].iter().map(|x| x + 1e-3).collect();
        let total: f64 = w.iter().sum();
        let mut x = ChamberVector::zeros(3);
        for (p, wi) in wit.iter().zip(&w) {
            x = x.add(&p.scaled(wi / total));
        }
        prop_assert!(contains(&body, &x, 1e-12));
    }

    #[test]
    fn cone_ignores_positive_scaling(a in cloud(), c in 0.1f64..10.0) {
        prop_assume!(a.iter().any(|p| p.norm() > 1e-6));
        let body = body_from_points(&a, dirs3()).unwrap();
        let cone = asymptotic_cone(&body).unwrap();
        let scaled = asymptotic_cone(&body.scaled(c)).unwrap();
        for (x, y) in cone.support_values().iter().zip(scaled.support_values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}
