mod common;

use mleval::error::Error;
use mleval::fixture;
use mleval::io::{read_bytes, table};
use mleval::model::{split_dataset, Partition};

#[test]
fn shipped_fixtures_match_generator() {
    let tmp = tempfile::tempdir().unwrap();
    let written = fixture::write_reference_fixtures(tmp.path()).unwrap();
    assert_eq!(written.len(), 11);
    for path in written {
        let name = path.file_name().unwrap();
        let shipped = read_bytes(&common::fixture_dir().join(name)).unwrap();
        assert_eq!(shipped, read_bytes(&path).unwrap(), "{name:?} is stale");
    }
}

#[test]
fn dataset_label_totals() {
    let truth = table::parse_labels(&common::fixture_dir().join("dataset_labels.csv")).unwrap();
    assert_eq!(truth.n_images(), 777);
    assert_eq!(truth.column_sums(), vec![605, 459, 267, 434]);
    let mut by_card = [0usize; 5];
    for i in 0..truth.n_images() {
        by_card[truth.cardinality(i)] += 1;
    }
    assert_eq!(by_card, [49, 167, 244, 158, 159]);
}

#[test]
fn test_fixture_cohorts_and_counts() {
    let truth = table::parse_labels(&common::fixture_dir().join("test_labels.csv")).unwrap();
    let mut by_card = [0usize; 5];
    for i in 0..truth.n_images() {
        by_card[truth.cardinality(i)] += 1;
    }
    assert_eq!(by_card, fixture::TEST_COHORT_SIZES);
    let positives: Vec<usize> = (0..4)
        .map(|l| (0..5).map(|c| fixture::test_counts(l, c)).map(|k| (k.tp + k.fn_) as usize).sum())
        .collect();
    assert_eq!(truth.column_sums(), positives);
    assert_eq!(positives[0], 59);
}

#[test]
fn dataset_splits_into_published_sizes() {
    let truth = table::parse_labels(&common::fixture_dir().join("dataset_labels.csv")).unwrap();
    let a = split_dataset(truth.image_ids(), (629, 70, 78), 11).unwrap();
    assert_eq!(a.sizes(), (629, 70, 78));
    assert_eq!(a, split_dataset(truth.image_ids(), (629, 70, 78), 11).unwrap());
    assert_eq!(a.members(Partition::Testing).len(), 78);
}

#[test]
fn header_only_label_file_is_empty() {
    let t = table::parse_labels_str("image_id,NGT,ETT,UAC,UVC\n", "empty.csv").unwrap();
    assert_eq!(t.n_images(), 0);
    assert_eq!(t.labels().len(), 4);
}

#[test]
fn fractional_label_reports_position() {
    let text = "image_id,NGT,ETT\na,1,0\nb,0,0.5\n";
    match table::parse_labels_str(text, "bad.csv").unwrap_err() {
        Error::Parse { path, line, column, .. } => {
            assert_eq!(path, "bad.csv");
            assert_eq!((line, column), (3, 3));
        }
        other => panic!("unexpected {other:?}"),
    }
}
