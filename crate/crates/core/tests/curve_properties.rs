mod common;

use common::{ap_oracle, auroc_oracle};
use mleval::curves::{pr_curve, roc_curve, threshold_trace};
use proptest::prelude::*;

fn ulps_apart(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

fn inputs() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (1usize..40).prop_flat_map(|n| {
        (
            proptest::collection::vec(prop_oneof![0.0..=1.0f64, (0u8..=10).prop_map(|k| k as f64 / 10.0)], n),
            proptest::collection::vec(any::<bool>(), n),
        )
    })
}

fn both_classes(t: &[bool]) -> bool {
    t.iter().any(|b| *b) && t.iter().any(|b| !*b)
}

proptest! {
    #[test]
    fn areas_match_oracles((s, t) in inputs()) {
        let pr = pr_curve(&s, &t).unwrap();
        match ap_oracle(&s, &t) {
            Some(exact) => prop_assert!(ulps_apart(pr.area.value.unwrap(), exact.to_f64()) <= 4),
            None => prop_assert!(pr.area.value.is_none()),
        }
        let roc = roc_curve(&s, &t).unwrap();
        prop_assert_eq!(roc.area.value, auroc_oracle(&s, &t));
    }

    #[test]
    fn areas_lie_in_unit_interval((s, t) in inputs()) {
        for c in [pr_curve(&s, &t).unwrap(), roc_curve(&s, &t).unwrap()] {
            if let Some(a) = c.area.value {
                prop_assert!((0.0..=1.0).contains(&a));
            }
            for p in &c.points {
                prop_assert!((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y));
            }
        }
    }

    #[test]
    fn invariant_under_monotone_transforms((s, t) in inputs()) {
        let squashed: Vec<f64> = s.iter().map(|v| v * v * 0.5 + 0.25).collect();
        prop_assert_eq!(roc_curve(&s, &t).unwrap().area, roc_curve(&squashed, &t).unwrap().area);
        prop_assert_eq!(pr_curve(&s, &t).unwrap().area, pr_curve(&squashed, &t).unwrap().area);
    }

    #[test]
    fn reversing_scores_complements_auroc((s, t) in inputs()) {
        prop_assume!(both_classes(&t));
        let a = roc_curve(&s, &t).unwrap().area.value.unwrap();
        let neg: Vec<f64> = s.iter().map(|v| 1.0 - v).collect();
        let b = roc_curve(&neg, &t).unwrap().area.value.unwrap();
        prop_assert!((a + b - 1.0).abs() <= 1e-12);
        let flipped: Vec<bool> = t.iter().map(|b| !b).collect();
        let c = roc_curve(&s, &flipped).unwrap().area.value.unwrap();
        prop_assert!((a + c - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn curves_are_monotone_in_threshold((s, t) in inputs()) {
        let roc = roc_curve(&s, &t).unwrap();
        for w in roc.points.windows(2) {
            prop_assert!(w[0].threshold > w[1].threshold);
            prop_assert!(w[0].x <= w[1].x && w[0].y <= w[1].y);
        }
        let pr = pr_curve(&s, &t).unwrap();
        if pr.is_defined() {
            let trace = threshold_trace(&pr).unwrap();
            for w in trace.windows(2) {
                prop_assert!(w[0].0 < w[1].0 && w[0].1 > w[1].1);
            }
            prop_assert_eq!(trace.last().unwrap().0, 1.0);
        }
    }

    #[test]
    fn invariant_under_permutation((s, t) in inputs(), seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut idx: Vec<usize> = (0..s.len()).collect();
        idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let s2: Vec<f64> = idx.iter().map(|&i| s[i]).collect();
        let t2: Vec<bool> = idx.iter().map(|&i| t[i]).collect();
        prop_assert_eq!(roc_curve(&s, &t).unwrap().area, roc_curve(&s2, &t2).unwrap().area);
        prop_assert_eq!(pr_curve(&s, &t).unwrap().area, pr_curve(&s2, &t2).unwrap().area);
    }
}

#[test]
fn perfect_and_inverted_rankings() {
    let s = [0.9, 0.8, 0.3, 0.1];
    let t = [true, true, false, false];
    assert_eq!(roc_curve(&s, &t).unwrap().area.value, Some(1.0));
    assert_eq!(pr_curve(&s, &t).unwrap().area.value, Some(1.0));
    let inv = [false, false, true, true];
    assert_eq!(roc_curve(&s, &inv).unwrap().area.value, Some(0.0));
    let all_tied = [0.5; 4];
    assert_eq!(roc_curve(&all_tied, &t).unwrap().area.value, Some(0.5));
    assert_eq!(pr_curve(&all_tied, &t).unwrap().area.value, Some(0.5));
}
