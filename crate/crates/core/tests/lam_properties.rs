mod common;

use common::{lam_oracle, minmax_oracle};
use mleval::lam::{compute_lam, normalize, FeatureMapDump, HeadWeights};
use mleval::model::LabelSet;
use ndarray::{Array2, Array3};
use proptest::prelude::*;

fn head(rows: Vec<Vec<f32>>) -> HeadWeights {
    let k = rows.len();
    let c = rows[0].len();
    let flat: Vec<f32> = rows.into_iter().flatten().collect();
    HeadWeights::new(
        Array2::from_shape_vec((k, c), flat).unwrap(),
        LabelSet::new((0..k).map(|i| format!("l{i}"))).unwrap(),
    )
    .unwrap()
}

fn nested(a: &Array3<f32>) -> Vec<Vec<Vec<f32>>> {
    a.outer_iter()
        .map(|p| p.rows().into_iter().map(|r| r.to_vec()).collect())
        .collect()
}

fn shapes() -> impl Strategy<Value = (Array3<f32>, Vec<f32>, Vec<f32>)> {
    (1usize..=5, 1usize..=6, 1usize..=6).prop_flat_map(|(c, h, w)| {
        (
            proptest::collection::vec(-100.0f32..100.0, c * h * w)
                .prop_map(move |v| Array3::from_shape_vec((c, h, w), v).unwrap()),
            proptest::collection::vec((-64i16..=64).prop_map(|k| k as f32 / 16.0), c),
            proptest::collection::vec((-64i16..=64).prop_map(|k| k as f32 / 16.0), c),
        )
    })
}

proptest! {
    #[test]
    fn matches_triple_loop((f, w1, _) in shapes()) {
        let oracle = lam_oracle(&nested(&f), &w1);
        let m = compute_lam(&FeatureMapDump::new(f).unwrap(), &head(vec![w1]), 0).unwrap();
        for (row, orow) in m.raw.rows().into_iter().zip(&oracle) {
            prop_assert_eq!(row.to_vec(), orow.clone());
        }
        let norm = minmax_oracle(&oracle);
        for (row, orow) in m.normalized.rows().into_iter().zip(&norm) {
            prop_assert_eq!(row.to_vec(), orow.clone());
        }
    }

    #[test]
    fn linear_in_weights((f, w1, w2) in shapes(), a in -3i8..=3, b in -3i8..=3) {
        let (a, b) = (a as f32 / 4.0, b as f32 / 4.0);
        let combined: Vec<f32> = w1.iter().zip(&w2).map(|(x, y)| a * x + b * y).collect();
        let features = FeatureMapDump::new(f).unwrap();
        let h = head(vec![w1, w2, combined]);
        let m1 = compute_lam(&features, &h, 0).unwrap().raw;
        let m2 = compute_lam(&features, &h, 1).unwrap().raw;
        let mc = compute_lam(&features, &h, 2).unwrap().raw;
        let expected = &m1 * a as f64 + &m2 * b as f64;
        let scale = features.data.iter().map(|v| v.abs() as f64).sum::<f64>() * 4.0 + 1.0;
        for (x, y) in mc.iter().zip(expected.iter()) {
            prop_assert!((x - y).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn constant_shift_does_not_change_normalized_map(
        raw in proptest::collection::vec((-512i32..512).prop_map(|k| k as f64 / 8.0), 1..40),
        bias in (-512i32..512).prop_map(|k| k as f64 / 8.0),
    ) {
        let a = Array2::from_shape_vec((1, raw.len()), raw).unwrap();
        prop_assert_eq!(normalize(&(&a + bias)), normalize(&a));
    }

    #[test]
    fn normalized_range((f, w1, _) in shapes()) {
        let m = compute_lam(&FeatureMapDump::new(f).unwrap(), &head(vec![w1]), 0).unwrap();
        prop_assert!(m.normalized.iter().all(|v| (0.0..=1.0).contains(v)));
        let lo = m.normalized.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = m.normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((lo == 0.0 && hi == 1.0) || (lo == 0.5 && hi == 0.5));
    }
}
