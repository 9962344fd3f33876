mod common;

use common::youden_oracle;
use mleval::error::Error;
use mleval::fixture;
use mleval::io::table;
use mleval::threshold::{select_all, select_threshold, ThresholdGrid};
use proptest::prelude::*;

fn validation() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..60).prop_flat_map(|n| {
        (
            proptest::collection::vec((0u16..=100).prop_map(|k| k as f64 / 100.0), n),
            proptest::collection::vec(any::<bool>(), n),
        )
    })
}

proptest! {
    #[test]
    fn chosen_threshold_maximises_objective((s, t) in validation()) {
        prop_assume!(t.iter().any(|b| *b) && t.iter().any(|b| !*b));
        for grid in [ThresholdGrid::FixedStep(0.05), ThresholdGrid::ObservedScores] {
            let r = select_threshold(&s, &t, grid).unwrap();
            let best = youden_oracle(&s, &t, r.chosen);
            prop_assert!((best - r.objective).abs() < 1e-12);
            for c in grid.candidates(&s) {
                prop_assert!(youden_oracle(&s, &t, c) <= best + 1e-12);
            }
            prop_assert_eq!(r.chosen, *r.tie_set.last().unwrap());
            prop_assert!(r.tie_set.iter().all(|&c| c <= r.chosen));
        }
    }

    #[test]
    fn observed_search_dominates_grid((s, t) in validation()) {
        prop_assume!(t.iter().any(|b| *b) && t.iter().any(|b| !*b));
        let grid = select_threshold(&s, &t, ThresholdGrid::FixedStep(0.05)).unwrap();
        let observed = select_threshold(&s, &t, ThresholdGrid::ObservedScores).unwrap();
        prop_assert!(observed.objective >= grid.objective - 1e-12);
    }

    #[test]
    fn separated_sets_reach_two(neg in proptest::collection::vec(0.0..0.5f64, 1..20), pos in proptest::collection::vec(0.5..=1.0f64, 1..20)) {
        let s: Vec<f64> = neg.iter().chain(&pos).copied().collect();
        let t: Vec<bool> = neg.iter().map(|_| false).chain(pos.iter().map(|_| true)).collect();
        let r = select_threshold(&s, &t, ThresholdGrid::ObservedScores).unwrap();
        prop_assert_eq!(r.objective, 2.0);
    }
}

#[test]
fn single_class_truth_is_degenerate() {
    let err = select_threshold(&[0.2, 0.7], &[true, true], ThresholdGrid::default()).unwrap_err();
    assert!(matches!(err, Error::DegenerateTruth));
}

#[test]
fn validation_fixture_selects_reference_thresholds() {
    let dir = common::fixture_dir();
    let truth = table::parse_labels(&dir.join("validation_labels.csv")).unwrap();
    let scores = table::parse_scores(&dir.join("validation_scores.csv")).unwrap();
    let (vector, results) = select_all(&scores, &truth, ThresholdGrid::FixedStep(0.05)).unwrap();
    assert_eq!(vector.as_slice(), &fixture::REFERENCE_THRESHOLDS);
    assert!(results.iter().all(|r| r.tie_set.len() == 1 && !r.degenerate));
}
