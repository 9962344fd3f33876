//! Shared data types: label sets, truth and score matrices, thresholds,
//! dataset splits and label-cardinality cohorts.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Labels used when no label set is given.
pub const DEFAULT_LABELS: [&str; 4] = ["NGT", "ETT", "UAC", "UVC"];

/// Ordered, unique label names. Index positions are stable for the lifetime
/// of the set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelSet {
    names: Vec<String>,
}

impl LabelSet {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidLabelSet("at least one label is required".into()));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(Error::InvalidLabelSet("label names must be non-empty".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidLabelSet(format!("duplicate label `{name}`")));
            }
        }
        Ok(Self { names })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }
}

impl Default for LabelSet {
    fn default() -> Self {
        Self {
            names: DEFAULT_LABELS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl TryFrom<Vec<String>> for LabelSet {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        LabelSet::new(names)
    }
}

impl From<LabelSet> for Vec<String> {
    fn from(set: LabelSet) -> Self {
        set.names
    }
}

fn check_unique_ids(ids: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(ids.len());
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateId(id.clone()));
        }
    }
    Ok(())
}

/// Per-image binary presence of each label (`true` = present).
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthMatrix {
    labels: LabelSet,
    image_ids: Vec<String>,
    truth: Array2<bool>,
}

impl GroundTruthMatrix {
    pub fn new(labels: LabelSet, image_ids: Vec<String>, truth: Array2<bool>) -> Result<Self> {
        check_unique_ids(&image_ids)?;
        if truth.nrows() != image_ids.len() || truth.ncols() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "truth is {}x{}, expected {}x{}",
                truth.nrows(),
                truth.ncols(),
                image_ids.len(),
                labels.len()
            )));
        }
        Ok(Self {
            labels,
            image_ids,
            truth,
        })
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn image_ids(&self) -> &[String] {
        &self.image_ids
    }

    pub fn truth(&self) -> &Array2<bool> {
        &self.truth
    }

    pub fn n_images(&self) -> usize {
        self.image_ids.len()
    }

    pub fn column(&self, label: usize) -> ArrayView1<'_, bool> {
        self.truth.column(label)
    }

    /// Number of positive labels on image `row`.
    pub fn cardinality(&self, row: usize) -> usize {
        self.truth.row(row).iter().filter(|&&t| t).count()
    }

    /// Positive count per label.
    pub fn column_sums(&self) -> Vec<usize> {
        self.truth
            .axis_iter(Axis(1))
            .map(|col| col.iter().filter(|&&t| t).count())
            .collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            labels: self.labels.clone(),
            image_ids: rows.iter().map(|&r| self.image_ids[r].clone()).collect(),
            truth: self.truth.select(Axis(0), rows),
        }
    }
}

/// Per-image, per-label probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    labels: LabelSet,
    image_ids: Vec<String>,
    scores: Array2<f64>,
}

impl ScoreMatrix {
    pub fn new(labels: LabelSet, image_ids: Vec<String>, scores: Array2<f64>) -> Result<Self> {
        check_unique_ids(&image_ids)?;
        if scores.nrows() != image_ids.len() || scores.ncols() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "scores are {}x{}, expected {}x{}",
                scores.nrows(),
                scores.ncols(),
                image_ids.len(),
                labels.len()
            )));
        }
        if let Some(((i, k), v)) = scores
            .indexed_iter()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::InvalidValue(format!(
                "score {v} for image `{}` label `{}` is not a probability",
                image_ids[i],
                labels.name(k)
            )));
        }
        Ok(Self {
            labels,
            image_ids,
            scores,
        })
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn image_ids(&self) -> &[String] {
        &self.image_ids
    }

    pub fn scores(&self) -> &Array2<f64> {
        &self.scores
    }

    pub fn n_images(&self) -> usize {
        self.image_ids.len()
    }

    pub fn column(&self, label: usize) -> ArrayView1<'_, f64> {
        self.scores.column(label)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self {
            labels: self.labels.clone(),
            image_ids: rows.iter().map(|&r| self.image_ids[r].clone()).collect(),
            scores: self.scores.select(Axis(0), rows),
        }
    }

    /// Reorders rows to follow `truth`'s image order. Both matrices must carry
    /// the same label names and the same set of image ids.
    pub fn aligned_to(&self, truth: &GroundTruthMatrix) -> Result<ScoreMatrix> {
        if self.labels != *truth.labels() {
            return Err(Error::DimensionMismatch(format!(
                "score labels {:?} differ from truth labels {:?}",
                self.labels.names(),
                truth.labels().names()
            )));
        }
        if self.n_images() != truth.n_images() {
            return Err(Error::DimensionMismatch(format!(
                "{} scored images but {} labelled images",
                self.n_images(),
                truth.n_images()
            )));
        }
        let position: HashMap<&str, usize> = self
            .image_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let rows = truth
            .image_ids()
            .iter()
            .map(|id| {
                position
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::MissingId(id.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.select_rows(&rows))
    }
}

/// One decision threshold per label, each strictly inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ThresholdVector {
    per_label: Vec<f64>,
}

impl ThresholdVector {
    pub fn new(per_label: Vec<f64>) -> Result<Self> {
        if let Some(t) = per_label.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(Error::InvalidValue(format!(
                "threshold {t} is not strictly inside (0, 1)"
            )));
        }
        Ok(Self { per_label })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.per_label
    }

    pub fn len(&self) -> usize {
        self.per_label.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_label.is_empty()
    }
}

impl TryFrom<Vec<f64>> for ThresholdVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        ThresholdVector::new(v)
    }
}

impl From<ThresholdVector> for Vec<f64> {
    fn from(t: ThresholdVector) -> Self {
        t.per_label
    }
}

/// Binary predictions aligned with the score matrix they were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    pub image_ids: Vec<String>,
    pub predicted: Array2<bool>,
}

/// A score at or above its label's threshold is a positive prediction.
pub fn binarize(scores: &ScoreMatrix, thresholds: &ThresholdVector) -> Result<PredictionMatrix> {
    if thresholds.len() != scores.labels().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} thresholds for {} labels",
            thresholds.len(),
            scores.labels().len()
        )));
    }
    let t = thresholds.as_slice();
    let predicted = Array2::from_shape_fn(scores.scores().dim(), |(i, k)| {
        scores.scores()[[i, k]] >= t[k]
    });
    Ok(PredictionMatrix {
        image_ids: scores.image_ids().to_vec(),
        predicted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Training,
    Validation,
    Testing,
}

impl Partition {
    pub const ALL: [Partition; 3] = [Partition::Training, Partition::Validation, Partition::Testing];

    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Training => "training",
            Partition::Validation => "validation",
            Partition::Testing => "testing",
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "training" => Ok(Partition::Training),
            "validation" => Ok(Partition::Validation),
            "testing" => Ok(Partition::Testing),
            other => Err(Error::InvalidValue(format!("unknown partition `{other}`"))),
        }
    }
}

/// Image-to-partition assignment, kept in the order ids were supplied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAssignment {
    pub assignments: Vec<(String, Partition)>,
    pub seed: u64,
}

impl SplitAssignment {
    pub fn partition_of(&self, id: &str) -> Option<Partition> {
        self.assignments
            .iter()
            .find(|(i, _)| i == id)
            .map(|(_, p)| *p)
    }

    pub fn members(&self, partition: Partition) -> Vec<&str> {
        self.assignments
            .iter()
            .filter(|(_, p)| *p == partition)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    /// (training, validation, testing) sizes.
    pub fn sizes(&self) -> (usize, usize, usize) {
        let count = |p| self.assignments.iter().filter(|(_, q)| *q == p).count();
        (
            count(Partition::Training),
            count(Partition::Validation),
            count(Partition::Testing),
        )
    }
}

/// Seeded uniform shuffle followed by contiguous assignment of exactly
/// `counts` = (training, validation, testing) ids.
pub fn split_dataset(
    ids: &[String],
    counts: (usize, usize, usize),
    seed: u64,
) -> Result<SplitAssignment> {
    let (n_train, n_val, n_test) = counts;
    let requested = n_train + n_val + n_test;
    if requested != ids.len() {
        return Err(Error::SplitCounts {
            requested,
            available: ids.len(),
        });
    }
    check_unique_ids(ids)?;

    let mut order: Vec<usize> = (0..ids.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let mut partition = vec![Partition::Testing; ids.len()];
    for (rank, &idx) in order.iter().enumerate() {
        partition[idx] = if rank < n_train {
            Partition::Training
        } else if rank < n_train + n_val {
            Partition::Validation
        } else {
            Partition::Testing
        };
    }
    Ok(SplitAssignment {
        assignments: ids.iter().cloned().zip(partition).collect(),
        seed,
    })
}

/// Which images a cohort keeps, by their number of positive labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CohortSelector {
    Exactly(usize),
    MoreThanOne,
    All,
}

impl CohortSelector {
    pub fn matches(self, cardinality: usize) -> bool {
        match self {
            CohortSelector::Exactly(c) => cardinality == c,
            CohortSelector::MoreThanOne => cardinality > 1,
            CohortSelector::All => true,
        }
    }

    /// `Exactly(0..=k)`, then `MoreThanOne`, then `All`.
    pub fn standard(k: usize) -> Vec<CohortSelector> {
        (0..=k)
            .map(CohortSelector::Exactly)
            .chain([CohortSelector::MoreThanOne, CohortSelector::All])
            .collect()
    }
}

impl fmt::Display for CohortSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CohortSelector::Exactly(c) => write!(f, "{c}"),
            CohortSelector::MoreThanOne => f.write_str(">1"),
            CohortSelector::All => f.write_str("all"),
        }
    }
}

impl FromStr for CohortSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            ">1" => Ok(CohortSelector::MoreThanOne),
            "all" => Ok(CohortSelector::All),
            other => other
                .parse::<usize>()
                .map(CohortSelector::Exactly)
                .map_err(|_| Error::InvalidValue(format!("unknown cohort `{other}`"))),
        }
    }
}

impl TryFrom<String> for CohortSelector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CohortSelector> for String {
    fn from(c: CohortSelector) -> Self {
        c.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardinalityCohort {
    pub selector: CohortSelector,
    pub member_ids: Vec<String>,
}

pub fn cohort_by_cardinality(
    truth: &GroundTruthMatrix,
    selector: CohortSelector,
) -> Result<CardinalityCohort> {
    let k = truth.labels().len();
    if let CohortSelector::Exactly(c) = selector {
        if c > k {
            return Err(Error::CardinalityOutOfRange {
                requested: c,
                labels: k,
            });
        }
    }
    let member_ids = (0..truth.n_images())
        .filter(|&i| selector.matches(truth.cardinality(i)))
        .map(|i| truth.image_ids()[i].clone())
        .collect();
    Ok(CardinalityCohort {
        selector,
        member_ids,
    })
}

pub fn standard_cohorts(truth: &GroundTruthMatrix) -> Vec<CardinalityCohort> {
    CohortSelector::standard(truth.labels().len())
        .into_iter()
        .map(|s| cohort_by_cardinality(truth, s).expect("standard selectors are in range"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("img{i:04}")).collect()
    }

    #[test]
    fn label_set_rejects_duplicates_and_empty() {
        assert!(LabelSet::new(["A", "A"]).is_err());
        assert!(LabelSet::new([""]).is_err());
        assert!(LabelSet::new(Vec::<String>::new()).is_err());
        assert_eq!(LabelSet::default().names(), &["NGT", "ETT", "UAC", "UVC"]);
    }

    #[test]
    fn binarize_is_inclusive_at_threshold() {
        let labels = LabelSet::new(["A"]).unwrap();
        let scores = ScoreMatrix::new(labels, ids(1), array![[0.80]]).unwrap();
        let t = ThresholdVector::new(vec![0.80]).unwrap();
        assert!(binarize(&scores, &t).unwrap().predicted[[0, 0]]);
    }

    #[test]
    fn binarize_hand_example() {
        let labels = LabelSet::new(["A", "B"]).unwrap();
        let scores = ScoreMatrix::new(labels, ids(2), array![[0.9, 0.1], [0.5, 0.75]]).unwrap();
        let t = ThresholdVector::new(vec![0.8, 0.75]).unwrap();
        let p = binarize(&scores, &t).unwrap();
        assert_eq!(p.predicted, array![[true, false], [false, true]]);
    }

    #[test]
    fn binarize_zero_scores_and_dimension_mismatch() {
        let scores =
            ScoreMatrix::new(LabelSet::default(), ids(3), Array2::zeros((3, 4))).unwrap();
        let t = ThresholdVector::new(vec![0.05, 0.5, 0.9, 0.3]).unwrap();
        assert!(binarize(&scores, &t).unwrap().predicted.iter().all(|p| !p));
        let short = ThresholdVector::new(vec![0.5]).unwrap();
        assert!(matches!(
            binarize(&scores, &short),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn thresholds_must_be_interior() {
        assert!(ThresholdVector::new(vec![0.0]).is_err());
        assert!(ThresholdVector::new(vec![1.0]).is_err());
        assert!(ThresholdVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn scores_must_be_probabilities() {
        let labels = LabelSet::new(["A"]).unwrap();
        assert!(ScoreMatrix::new(labels.clone(), ids(1), array![[1.5]]).is_err());
        assert!(ScoreMatrix::new(labels, ids(1), array![[f64::NAN]]).is_err());
    }

    #[test]
    fn split_sizes_match_table_counts() {
        let all = ids(777);
        let split = split_dataset(&all, (629, 70, 78), 2020).unwrap();
        assert_eq!(split.sizes(), (629, 70, 78));
        assert_eq!(split, split_dataset(&all, (629, 70, 78), 2020).unwrap());
        assert_ne!(split, split_dataset(&all, (629, 70, 78), 2021).unwrap());
    }

    #[test]
    fn split_everything_to_training() {
        let all = ids(10);
        let split = split_dataset(&all, (10, 0, 0), 1).unwrap();
        assert!(split
            .assignments
            .iter()
            .all(|(_, p)| *p == Partition::Training));
    }

    #[test]
    fn split_rejects_bad_counts() {
        assert!(matches!(
            split_dataset(&ids(5), (2, 2, 2), 0),
            Err(Error::SplitCounts {
                requested: 6,
                available: 5
            })
        ));
    }

    #[test]
    fn cohorts_partition_images() {
        let truth = GroundTruthMatrix::new(
            LabelSet::new(["A", "B"]).unwrap(),
            ids(4),
            array![[false, false], [true, false], [true, true], [false, true]],
        )
        .unwrap();
        let c1 = cohort_by_cardinality(&truth, CohortSelector::Exactly(1)).unwrap();
        assert_eq!(c1.member_ids, vec!["img0001", "img0003"]);
        let more = cohort_by_cardinality(&truth, CohortSelector::MoreThanOne).unwrap();
        assert_eq!(more.member_ids, vec!["img0002"]);
        assert!(matches!(
            cohort_by_cardinality(&truth, CohortSelector::Exactly(3)),
            Err(Error::CardinalityOutOfRange { .. })
        ));
    }

    #[test]
    fn all_zero_truth_lands_in_exactly_zero() {
        let truth =
            GroundTruthMatrix::new(LabelSet::default(), ids(5), Array2::from_elem((5, 4), false))
                .unwrap();
        let c0 = cohort_by_cardinality(&truth, CohortSelector::Exactly(0)).unwrap();
        assert_eq!(c0.member_ids.len(), 5);
    }

    #[test]
    fn alignment_reorders_by_id() {
        let labels = LabelSet::new(["A"]).unwrap();
        let truth = GroundTruthMatrix::new(
            labels.clone(),
            vec!["x".into(), "y".into()],
            array![[true], [false]],
        )
        .unwrap();
        let scores =
            ScoreMatrix::new(labels, vec!["y".into(), "x".into()], array![[0.1], [0.9]]).unwrap();
        let aligned = scores.aligned_to(&truth).unwrap();
        assert_eq!(aligned.image_ids(), &["x", "y"]);
        assert_eq!(aligned.scores(), &array![[0.9], [0.1]]);
    }

    #[test]
    fn selector_text_round_trip() {
        for s in CohortSelector::standard(4) {
            assert_eq!(s.to_string().parse::<CohortSelector>().unwrap(), s);
        }
    }
}
