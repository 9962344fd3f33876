//! Reference fixtures built from fixed confusion counts.
//!
//! The test fixture has 78 images in cardinality cohorts of 7, 13, 24, 19
//! and 15 images. Each (label, cohort) cell gets exactly the TN/FP/FN/TP
//! counts in [`TEST_COUNTS`] at [`REFERENCE_THRESHOLDS`]; scores are placed
//! deterministically on the required side of each threshold. Rank order
//! among scores is arbitrary, so AP and AUROC on these files carry no
//! reference meaning.
//!
//! The validation fixture (70 images) is built so that sensitivity plus
//! specificity on a 0.05 grid peaks exactly at the reference thresholds,
//! and the dataset fixture concatenates a 629-image training block with the
//! validation and test truth.

use std::path::{Path, PathBuf};

use image::GrayImage;
use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::io::{table, tensor::TensorDump, write_atomic};
use crate::lam::{FeatureMapDump, HeadWeights};
use crate::metrics::ConfusionCounts;
use crate::model::{CohortSelector, GroundTruthMatrix, LabelSet, ScoreMatrix, ThresholdVector};
use crate::report::{Metric, ReferenceValue, POOLED_LABEL};

pub const REFERENCE_THRESHOLDS: [f64; 4] = [0.8, 0.2, 0.8, 0.75];

pub const TEST_COHORT_SIZES: [usize; 5] = [7, 13, 24, 19, 15];

/// `[label][cardinality]` as `(tn, fp, fn, tp)`.
pub const TEST_COUNTS: [[(u64, u64, u64, u64); 5]; 4] = [
    [(6, 1, 0, 0), (5, 0, 0, 8), (5, 0, 1, 18), (1, 1, 1, 16), (0, 0, 1, 14)],
    [(7, 0, 0, 0), (11, 2, 0, 0), (8, 1, 2, 13), (2, 0, 1, 16), (0, 0, 1, 14)],
    [(7, 0, 0, 0), (13, 0, 0, 0), (20, 0, 2, 2), (11, 0, 3, 5), (0, 0, 2, 13)],
    [(6, 1, 0, 0), (8, 0, 0, 5), (12, 2, 0, 10), (0, 4, 0, 15), (0, 0, 0, 15)],
];

/// Whole-test-set counts of a second network scored on the same truth.
pub const SINGLE_LABEL_COUNTS: [(u64, u64, u64, u64); 4] =
    [(16, 3, 1, 58), (22, 9, 1, 46), (50, 1, 4, 23), (26, 7, 4, 41)];

pub const VALIDATION_CARDINALITIES: [usize; 5] = [4, 16, 22, 13, 15];
pub const VALIDATION_LABEL_SUMS: [usize; 4] = [56, 45, 21, 37];
pub const TRAINING_CARDINALITIES: [usize; 5] = [38, 138, 198, 126, 129];
pub const TRAINING_LABEL_SUMS: [usize; 4] = [490, 367, 219, 352];

/// Published sensitivity, specificity and Hamming loss for the `>1` and
/// `all` cohorts, including the pooled row.
const PUBLISHED: [(&str, [f64; 3], [f64; 3]); 5] = [
    ("NGT", [0.941, 0.857, 0.035], [0.949, 0.895, 0.039]),
    ("ETT", [0.915, 1.0, 0.138], [0.915, 0.967, 0.115]),
    ("UAC", [0.741, 1.0, 0.069], [0.741, 1.0, 0.051]),
    ("UVC", [0.950, 0.667, 0.103], [0.956, 0.788, 0.090]),
    (POOLED_LABEL, [0.903, 0.896, 0.086], [0.910, 0.925, 0.074]),
];

pub fn published_reference() -> Vec<ReferenceValue> {
    let metrics = [Metric::Sensitivity, Metric::Specificity, Metric::HammingLoss];
    let mut out = Vec::new();
    for (cohort, pick) in [(CohortSelector::MoreThanOne, 0), (CohortSelector::All, 1)] {
        for (label, more, all) in PUBLISHED {
            let values = if pick == 0 { more } else { all };
            for (metric, value) in metrics.iter().zip(values) {
                out.push(ReferenceValue {
                    label: label.to_string(),
                    cohort,
                    metric: *metric,
                    value,
                });
            }
        }
    }
    out
}

pub fn reference_thresholds() -> ThresholdVector {
    ThresholdVector::new(REFERENCE_THRESHOLDS.to_vec()).expect("thresholds inside (0, 1)")
}

/// A boolean matrix with the given row and column sums. Rows are filled in
/// order of decreasing row sum, each taking the columns with the largest
/// remaining demand (lowest index on ties); this succeeds whenever the
/// sums are realizable.
pub fn realize(row_sums: &[usize], col_sums: &[usize]) -> Result<Array2<bool>> {
    let mut out = Array2::from_elem((row_sums.len(), col_sums.len()), false);
    let mut demand = col_sums.to_vec();
    let mut order: Vec<usize> = (0..row_sums.len()).collect();
    order.sort_by(|&a, &b| row_sums[b].cmp(&row_sums[a]));
    for r in order {
        if row_sums[r] > demand.len() {
            return Err(Error::InvalidValue(format!("row sum {} exceeds column count", row_sums[r])));
        }
        let mut cols: Vec<usize> = (0..demand.len()).collect();
        cols.sort_by(|&a, &b| demand[b].cmp(&demand[a]).then(a.cmp(&b)));
        for &c in cols.iter().take(row_sums[r]) {
            if demand[c] == 0 {
                return Err(Error::InvalidValue("row and column sums are not realizable".into()));
            }
            demand[c] -= 1;
            out[[r, c]] = true;
        }
    }
    if demand.iter().any(|&d| d != 0) {
        return Err(Error::InvalidValue("row and column sums are not realizable".into()));
    }
    Ok(out)
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Deterministic spread in `[0, 1]`.
fn spread(row: usize, salt: usize) -> f64 {
    ((row * 7919 + salt * 104_729) % 101) as f64 / 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Tn,
    Fp,
    Fn,
    Tp,
}

fn score_for(outcome: Outcome, t: f64, f: f64) -> f64 {
    round3(match outcome {
        Outcome::Tp => t + (1.0 - t) * (0.10 + 0.85 * f),
        Outcome::Fp => t + (1.0 - t) * (0.05 + 0.60 * f),
        Outcome::Fn => t * (0.55 + 0.40 * f),
        Outcome::Tn => t * (0.05 + 0.85 * f),
    })
}

/// Outcomes for `rows` of one label: the first `fn_` positives are missed,
/// the first `fp` negatives are false alarms.
fn outcomes(truth: impl Iterator<Item = bool>, fp: u64, fn_: u64) -> Vec<Outcome> {
    let (mut pos, mut neg) = (0u64, 0u64);
    truth
        .map(|t| {
            if t {
                pos += 1;
                if pos <= fn_ { Outcome::Fn } else { Outcome::Tp }
            } else {
                neg += 1;
                if neg <= fp { Outcome::Fp } else { Outcome::Tn }
            }
        })
        .collect()
}

fn ids(prefix: &str, n: usize, width: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}-{i:0width$}")).collect()
}

/// Stacks per-cardinality blocks, cardinality ascending.
fn stack(blocks: &[Array2<bool>], k: usize) -> Array2<bool> {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Array2::from_elem((n, k), false);
    let mut r = 0;
    for b in blocks {
        for row in b.rows() {
            out.row_mut(r).assign(&row);
            r += 1;
        }
    }
    out
}

fn truth_by_cardinality(cardinalities: &[usize], label_sums: &[usize]) -> Result<Array2<bool>> {
    let row_sums: Vec<usize> = cardinalities
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
        .collect();
    realize(&row_sums, label_sums)
}

pub fn test_truth() -> Result<GroundTruthMatrix> {
    let k = REFERENCE_THRESHOLDS.len();
    let blocks = TEST_COHORT_SIZES
        .iter()
        .enumerate()
        .map(|(c, &m)| {
            let demand: Vec<usize> = TEST_COUNTS
                .iter()
                .map(|row| (row[c].2 + row[c].3) as usize)
                .collect();
            realize(&vec![c; m], &demand)
        })
        .collect::<Result<Vec<_>>>()?;
    let truth = stack(&blocks, k);
    GroundTruthMatrix::new(LabelSet::default(), ids("test", truth.nrows(), 2), truth)
}

/// Scores realizing [`TEST_COUNTS`] on [`test_truth`].
pub fn test_scores(truth: &GroundTruthMatrix) -> Result<ScoreMatrix> {
    let mut scores = Array2::zeros(truth.truth().dim());
    for (label, &t) in REFERENCE_THRESHOLDS.iter().enumerate() {
        let mut start = 0;
        for (c, &m) in TEST_COHORT_SIZES.iter().enumerate() {
            let (_, fp, fn_, _) = TEST_COUNTS[label][c];
            let rows = start..start + m;
            let col = truth.column(label);
            let outs = outcomes(rows.clone().map(|r| col[r]), fp, fn_);
            for (r, o) in rows.zip(outs) {
                scores[[r, label]] = score_for(o, t, spread(r, label));
            }
            start += m;
        }
    }
    ScoreMatrix::new(truth.labels().clone(), truth.image_ids().to_vec(), scores)
}

/// Scores realizing [`SINGLE_LABEL_COUNTS`] on [`test_truth`].
pub fn single_label_scores(truth: &GroundTruthMatrix) -> Result<ScoreMatrix> {
    let mut scores = Array2::zeros(truth.truth().dim());
    for (label, &t) in REFERENCE_THRESHOLDS.iter().enumerate() {
        let (_, fp, fn_, _) = SINGLE_LABEL_COUNTS[label];
        let outs = outcomes(truth.column(label).iter().copied(), fp, fn_);
        for (r, o) in outs.into_iter().enumerate() {
            scores[[r, label]] = score_for(o, t, spread(r, label + 4));
        }
    }
    ScoreMatrix::new(truth.labels().clone(), truth.image_ids().to_vec(), scores)
}

pub fn validation_truth() -> Result<GroundTruthMatrix> {
    let truth = truth_by_cardinality(&VALIDATION_CARDINALITIES, &VALIDATION_LABEL_SUMS)?;
    GroundTruthMatrix::new(LabelSet::default(), ids("val", truth.nrows(), 2), truth)
}

/// Per label with threshold `t`: one positive far below `t`, one exactly at
/// `t`, the rest well above; one negative far above `t`, one just below
/// it, the rest lower still. Any grid step up loses a true positive and
/// any step down gains a false positive.
pub fn validation_scores(truth: &GroundTruthMatrix) -> Result<ScoreMatrix> {
    let mut scores = Array2::zeros(truth.truth().dim());
    for (label, &t) in REFERENCE_THRESHOLDS.iter().enumerate() {
        let (mut pos, mut neg) = (0usize, 0usize);
        for (r, &is_pos) in truth.column(label).iter().enumerate() {
            let f = spread(r, label);
            scores[[r, label]] = if is_pos {
                pos += 1;
                match pos {
                    1 => round3(0.3 * t),
                    2 => t,
                    _ => round3(t + (1.0 - t) * (0.1 + 0.85 * f)),
                }
            } else {
                neg += 1;
                match neg {
                    1 => round3(t + 0.9 * (1.0 - t)),
                    2 => round3(t - 0.01),
                    _ => round3((t - 0.01) * (0.1 + 0.85 * f)),
                }
            };
        }
    }
    ScoreMatrix::new(truth.labels().clone(), truth.image_ids().to_vec(), scores)
}

/// Training block, then validation, then test truth: 777 images.
pub fn dataset_truth() -> Result<GroundTruthMatrix> {
    let train = truth_by_cardinality(&TRAINING_CARDINALITIES, &TRAINING_LABEL_SUMS)?;
    let val = validation_truth()?;
    let test = test_truth()?;
    let k = REFERENCE_THRESHOLDS.len();
    let all = stack(&[train.clone(), val.truth().clone(), test.truth().clone()], k);
    let mut names = ids("train", train.nrows(), 4);
    names.extend_from_slice(val.image_ids());
    names.extend_from_slice(test.image_ids());
    GroundTruthMatrix::new(LabelSet::default(), names, all)
}

/// Counts a [`TEST_COUNTS`] row set as [`ConfusionCounts`].
pub fn test_counts(label: usize, cardinality: usize) -> ConfusionCounts {
    let (tn, fp, fn_, tp) = TEST_COUNTS[label][cardinality];
    ConfusionCounts::new(tn, fp, fn_, tp)
}

/// Small activation-map inputs: a `4 x 7 x 7` feature map, `4 x 4` head
/// weights and a 28x28 grey base image.
pub fn lam_inputs() -> Result<(FeatureMapDump, HeadWeights, GrayImage)> {
    let data = Array3::from_shape_fn((4, 7, 7), |(c, y, x)| {
        let (cy, cx) = [(1.0, 1.0), (1.0, 5.0), (5.0, 1.0), (5.0, 5.0)][c];
        let d2 = (y as f32 - cy).powi(2) + (x as f32 - cx).powi(2);
        (4.0 - d2).max(0.0) * 0.5
    });
    let mut features = FeatureMapDump::new(data)?;
    features.source_image_id = Some("test-01".into());
    features.source_image_size = Some((28, 28));
    let weights = Array2::from_shape_fn((4, 4), |(k, c)| if k == c { 1.0 } else { -0.25 });
    let head = HeadWeights::new(weights, LabelSet::default())?;
    let base = GrayImage::from_fn(28, 28, |x, y| image::Luma([(40 + 4 * x + 2 * y) as u8]));
    Ok((features, head, base))
}

/// Writes every reference fixture file into `dir`.
pub fn write_reference_fixtures(dir: &Path) -> Result<Vec<PathBuf>> {
    let test = test_truth()?;
    let val = validation_truth()?;
    let (features, head, base) = lam_inputs()?;
    let mut png = std::io::Cursor::new(Vec::new());
    base.write_to(&mut png, image::ImageFormat::Png)?;

    let files: Vec<(&str, Vec<u8>)> = vec![
        ("test_labels.csv", table::write_labels(&test).into_bytes()),
        ("test_scores.csv", table::write_scores(&test_scores(&test)?).into_bytes()),
        (
            "single_label_scores.csv",
            table::write_scores(&single_label_scores(&test)?).into_bytes(),
        ),
        (
            "thresholds.csv",
            table::write_thresholds(test.labels(), &reference_thresholds()).into_bytes(),
        ),
        ("validation_labels.csv", table::write_labels(&val).into_bytes()),
        (
            "validation_scores.csv",
            table::write_scores(&validation_scores(&val)?).into_bytes(),
        ),
        ("dataset_labels.csv", table::write_labels(&dataset_truth()?).into_bytes()),
        (
            "published_reference.csv",
            table::write_reference(&published_reference()).into_bytes(),
        ),
        ("lam_features.bin", TensorDump::from(&features).to_bytes()?),
        ("lam_weights.bin", TensorDump::from(&head).to_bytes()?),
        ("lam_base.png", png.into_inner()),
    ];
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}
