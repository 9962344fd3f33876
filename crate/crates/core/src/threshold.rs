//! Per-label operating thresholds chosen on validation data by maximising
//! sensitivity + specificity.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GroundTruthMatrix, ScoreMatrix, ThresholdVector};

/// Candidate thresholds to evaluate. Candidates at 0 or 1 are never used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ThresholdGrid {
    /// `step, 2*step, ...` strictly below 1.
    FixedStep(f64),
    /// Every distinct observed score, plus one just above the highest.
    ObservedScores,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        ThresholdGrid::FixedStep(0.05)
    }
}

impl std::str::FromStr for ThresholdGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "observed" {
            return Ok(ThresholdGrid::ObservedScores);
        }
        let step: f64 = s
            .strip_prefix("step:")
            .unwrap_or(s)
            .parse()
            .map_err(|_| Error::InvalidValue(format!("unknown grid `{s}`")))?;
        if !(step > 0.0 && step < 1.0) {
            return Err(Error::InvalidValue(format!("grid step {step} outside (0, 1)")));
        }
        Ok(ThresholdGrid::FixedStep(step))
    }
}

impl ThresholdGrid {
    pub fn candidates(&self, scores: &[f64]) -> Vec<f64> {
        match *self {
            ThresholdGrid::FixedStep(step) => {
                // k / m is exact-rounded when the step divides 1, so 0.8 is 0.8
                let m = (1.0 / step).round();
                let divides = ((1.0 / step) - m).abs() < 1e-9;
                (1u32..)
                    .map(|k| if divides { k as f64 / m } else { k as f64 * step })
                    .take_while(|&t| t < 1.0 - 1e-12)
                    .collect()
            }
            ThresholdGrid::ObservedScores => {
                let mut c: Vec<f64> = scores
                    .iter()
                    .filter(|&&s| s > 0.0)
                    .map(|&s| if s >= 1.0 { 1.0 - f64::EPSILON / 2.0 } else { s })
                    .collect();
                c.sort_by(f64::total_cmp);
                c.dedup();
                // just above the top score, so predicting no positives is reachable
                let top = scores.iter().copied().fold(0.0f64, f64::max);
                if top < 1.0 - f64::EPSILON / 2.0 {
                    c.push(f64::from_bits(top.to_bits() + 1));
                }
                c
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearchResult {
    pub label_index: usize,
    pub chosen: f64,
    /// Maximum of sensitivity + specificity over the candidates.
    pub objective: f64,
    pub candidates_evaluated: usize,
    /// Candidates reaching the maximum, ascending.
    pub tie_set: Vec<f64>,
    /// Every candidate scored the same objective.
    pub degenerate: bool,
}

/// sensitivity + specificity, scaled by positives * negatives so candidates
/// compare exactly.
fn scaled_objective(scores: &[f64], truth: &[bool], threshold: f64, p: u64, n: u64) -> u128 {
    let (mut tp, mut tn) = (0u64, 0u64);
    for (&s, &t) in scores.iter().zip(truth) {
        let predicted = s >= threshold;
        if t && predicted {
            tp += 1;
        } else if !t && !predicted {
            tn += 1;
        }
    }
    tp as u128 * n as u128 + tn as u128 * p as u128
}

/// Largest threshold among those maximising sensitivity + specificity.
pub fn select_threshold(
    val_scores: &[f64],
    val_truth: &[bool],
    grid: ThresholdGrid,
) -> Result<ThresholdSearchResult> {
    if val_scores.len() != val_truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores for {} truth values",
            val_scores.len(),
            val_truth.len()
        )));
    }
    let p = val_truth.iter().filter(|&&t| t).count() as u64;
    let n = val_truth.len() as u64 - p;
    if p == 0 || n == 0 {
        return Err(Error::DegenerateTruth);
    }
    let candidates = grid.candidates(val_scores);
    if candidates.is_empty() {
        return Err(Error::EmptyInput("no threshold candidates".into()));
    }
    let objectives: Vec<u128> = candidates
        .iter()
        .map(|&t| scaled_objective(val_scores, val_truth, t, p, n))
        .collect();
    let best = *objectives.iter().max().expect("non-empty");
    let tie_set: Vec<f64> = candidates
        .iter()
        .zip(&objectives)
        .filter(|(_, &o)| o == best)
        .map(|(&t, _)| t)
        .collect();
    let chosen = *tie_set.last().expect("argmax is non-empty");
    Ok(ThresholdSearchResult {
        label_index: 0,
        chosen,
        objective: best as f64 / (p as f64 * n as f64),
        candidates_evaluated: candidates.len(),
        degenerate: tie_set.len() == candidates.len(),
        tie_set,
    })
}

/// Runs [`select_threshold`] on every label column independently.
pub fn select_all(
    val_scores: &ScoreMatrix,
    val_truth: &GroundTruthMatrix,
    grid: ThresholdGrid,
) -> Result<(ThresholdVector, Vec<ThresholdSearchResult>)> {
    let scores = val_scores.aligned_to(val_truth)?;
    let mut results = Vec::with_capacity(val_truth.labels().len());
    for k in 0..val_truth.labels().len() {
        let s: Array1<f64> = scores.column(k).to_owned();
        let t: Array1<bool> = val_truth.column(k).to_owned();
        let mut r = select_threshold(s.as_slice().unwrap(), t.as_slice().unwrap(), grid).map_err(
            |e| Error::Label {
                label: val_truth.labels().name(k).to_string(),
                source: Box::new(e),
            },
        )?;
        r.label_index = k;
        results.push(r);
    }
    let vector = ThresholdVector::new(results.iter().map(|r| r.chosen).collect())?;
    Ok((vector, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LabelSet;
    use ndarray::Array2;

    #[test]
    fn fixed_grid_hits_multiples_exactly() {
        let c = ThresholdGrid::FixedStep(0.05).candidates(&[]);
        assert_eq!(c.len(), 19);
        assert_eq!(c[0], 0.05);
        assert_eq!(c[15], 0.8);
        assert_eq!(c[14], 0.75);
        assert_eq!(c[3], 0.2);
        assert_eq!(*c.last().unwrap(), 0.95);
    }

    #[test]
    fn separated_scores_tie_and_pick_largest() {
        let scores = [0.7, 0.8, 0.95, 0.72, 0.3, 0.1, 0.25, 0.0];
        let truth = [true, true, true, true, false, false, false, false];
        let r = select_threshold(&scores, &truth, ThresholdGrid::FixedStep(0.05)).unwrap();
        assert_eq!(r.objective, 2.0);
        assert_eq!(r.chosen, 0.7);
        let expected: Vec<f64> = (7..=14).map(|k| k as f64 / 20.0).collect();
        assert_eq!(r.tie_set, expected);
        assert!(!r.degenerate);
    }

    #[test]
    fn identical_scores_are_flagged() {
        let r = select_threshold(&[0.5; 4], &[true, false, true, false], ThresholdGrid::default())
            .unwrap();
        assert!(r.degenerate);
        assert_eq!(r.objective, 1.0);
    }

    #[test]
    fn single_class_truth_is_an_error() {
        assert!(matches!(
            select_threshold(&[0.1, 0.9], &[true, true], ThresholdGrid::default()),
            Err(Error::DegenerateTruth)
        ));
    }

    #[test]
    fn observed_grid_excludes_endpoints() {
        let c = ThresholdGrid::ObservedScores.candidates(&[0.0, 0.4, 1.0, 0.4]);
        assert_eq!(c, vec![0.4, 1.0 - f64::EPSILON / 2.0]);
        let c = ThresholdGrid::ObservedScores.candidates(&[0.0, 0.25]);
        assert_eq!(c.len(), 2);
        assert!(c[1] > 0.25 && c[1] < 0.25 + 1e-15);
    }

    #[test]
    fn observed_grid_can_predict_nothing() {
        let r = select_threshold(&[0.0, 0.3, 0.6], &[true, false, false], ThresholdGrid::ObservedScores)
            .unwrap();
        assert_eq!(r.objective, 1.0);
        assert!(r.chosen > 0.6);
    }

    #[test]
    fn grid_parses() {
        assert_eq!("observed".parse::<ThresholdGrid>().unwrap(), ThresholdGrid::ObservedScores);
        assert_eq!("0.1".parse::<ThresholdGrid>().unwrap(), ThresholdGrid::FixedStep(0.1));
        assert!("step:2".parse::<ThresholdGrid>().is_err());
    }

    #[test]
    fn per_label_selection() {
        // label 0 splits at 0.5, label 1 at 0.9
        let n = 8;
        let truth = Array2::from_shape_fn((n, 2), |(i, _)| i % 2 == 0);
        let scores = Array2::from_shape_fn((n, 2), |(i, k)| match (i % 2 == 0, k) {
            (true, 0) => 0.5 + 0.01 * i as f64,
            (false, 0) => 0.45 - 0.01 * i as f64,
            (true, _) => 0.9 + 0.001 * i as f64,
            (false, _) => 0.86 - 0.01 * i as f64,
        });
        let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let labels = LabelSet::new(["a", "b"]).unwrap();
        let truth = GroundTruthMatrix::new(labels.clone(), ids.clone(), truth).unwrap();
        let scores = ScoreMatrix::new(labels, ids, scores).unwrap();
        let (v, results) = select_all(&scores, &truth, ThresholdGrid::default()).unwrap();
        assert_eq!(v.as_slice(), &[0.5, 0.9]);
        assert_eq!(results[1].label_index, 1);
    }

    #[test]
    fn label_errors_carry_the_label() {
        let labels = LabelSet::new(["a", "b"]).unwrap();
        let ids: Vec<String> = vec!["x".into(), "y".into()];
        let truth = GroundTruthMatrix::new(
            labels.clone(),
            ids.clone(),
            ndarray::array![[true, true], [false, true]],
        )
        .unwrap();
        let scores =
            ScoreMatrix::new(labels, ids, ndarray::array![[0.9, 0.9], [0.1, 0.2]]).unwrap();
        let err = select_all(&scores, &truth, ThresholdGrid::default()).unwrap_err();
        assert!(matches!(err, Error::Label { ref label, .. } if label == "b"));
    }
}
