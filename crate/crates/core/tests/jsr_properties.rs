use joint_spectrum::jsr::jsr_bounds;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn set() -> impl Strategy<Value = Vec<DMatrix<f64>>> {
    (2usize..=3, 1usize..=3).prop_flat_map(|(d, count)| {
        prop::collection::vec(
            prop::collection::vec(-2.0f64..2.0, d * d).prop_map(move |v| DMatrix::from_row_slice(d, d, &v)),
            count,
        )
        .prop_filter("zero matrix", |ms| ms.iter().all(|m| m.amax() > 1e-3))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn brackets_refine_monotonically(ms in set(), delta in 0.0f64..0.05) {
        let mut prev: Option<(f64, f64)> = None;
        for depth in 1..=6 {
            let b = jsr_bounds(&ms, depth, delta).unwrap();
            prop_assert!(b.lower <= b.upper + 1e-12);
            if let Some((lo, up)) = prev {
                prop_assert!(b.lower >= lo && b.upper <= up);
            }
            prev = Some((b.lower, b.upper));
        }
    }

    #[test]
    fn scaling_shifts_both_bounds(ms in set(), c in prop::sample::select(vec![0.5f64, 3.0, -2.0])) {
        let a = jsr_bounds(&ms, 5, 0.01).unwrap();
        let scaled: Vec<_> = ms.iter().map(|m| m * c).collect();
        let b = jsr_bounds(&scaled, 5, 0.01).unwrap();
        prop_assert!((b.lower - a.lower - c.abs().ln()).abs() <= 1e-9);
        prop_assert!((b.upper - a.upper - c.abs().ln()).abs() <= 1e-9);
    }
}
