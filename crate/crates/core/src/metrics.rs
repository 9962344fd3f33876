//! Confusion tallies and proportion metrics with explicit undefined values.
//!
//! A metric whose denominator is zero (sensitivity on a cohort without
//! positives, specificity without negatives) is [`MetricValue::undefined`]
//! rather than 0 or 1. Reports render it as a dash.

use std::ops::{Add, AddAssign};

use ndarray::{Array2, ArrayView1, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tp: u64,
}

impl ConfusionCounts {
    pub fn new(tn: u64, fp: u64, fn_: u64, tp: u64) -> Self {
        Self { tn, fp, fn_, tp }
    }

    pub fn total(&self) -> u64 {
        self.tn + self.fp + self.fn_ + self.tp
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }

    pub fn errors(&self) -> u64 {
        self.fp + self.fn_
    }

    /// Counts seen from the complementary label (truth and prediction both
    /// inverted).
    pub fn complement(&self) -> Self {
        Self {
            tn: self.tp,
            fp: self.fn_,
            fn_: self.fp,
            tp: self.tn,
        }
    }

    fn record(&mut self, truth: bool, pred: bool) {
        match (truth, pred) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
        }
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            tn: self.tn + rhs.tn,
            fp: self.fp + rhs.fp,
            fn_: self.fn_ + rhs.fn_,
            tp: self.tp + rhs.tp,
        }
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub numerator: u64,
    pub denominator: u64,
}

/// A metric value in `[0, 1]`, or undefined. Count-based metrics keep the
/// integer fraction they were computed from; curve areas do not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: Option<f64>,
    pub fraction: Option<Fraction>,
}

impl MetricValue {
    pub fn ratio(numerator: u64, denominator: u64) -> Self {
        let value = (denominator > 0).then(|| numerator as f64 / denominator as f64);
        Self {
            value,
            fraction: Some(Fraction {
                numerator,
                denominator,
            }),
        }
    }

    pub fn area(value: f64) -> Self {
        Self {
            value: Some(value),
            fraction: None,
        }
    }

    pub fn undefined() -> Self {
        Self {
            value: None,
            fraction: None,
        }
    }

    pub fn is_defined(&self) -> bool {
        self.value.is_some()
    }
}

pub fn confusion(truth: ArrayView1<'_, bool>, pred: ArrayView1<'_, bool>) -> Result<ConfusionCounts> {
    if truth.len() != pred.len() {
        return Err(Error::DimensionMismatch(format!(
            "truth has {} entries, predictions {}",
            truth.len(),
            pred.len()
        )));
    }
    let mut counts = ConfusionCounts::default();
    Zip::from(&truth)
        .and(&pred)
        .for_each(|&t, &p| counts.record(t, p));
    Ok(counts)
}

/// tp / (tp + fn)
pub fn sensitivity(c: &ConfusionCounts) -> MetricValue {
    MetricValue::ratio(c.tp, c.positives())
}

/// tn / (tn + fp)
pub fn specificity(c: &ConfusionCounts) -> MetricValue {
    MetricValue::ratio(c.tn, c.negatives())
}

/// tp / (tp + fp)
pub fn precision(c: &ConfusionCounts) -> MetricValue {
    MetricValue::ratio(c.tp, c.tp + c.fp)
}

pub fn accuracy(c: &ConfusionCounts) -> MetricValue {
    MetricValue::ratio(c.tp + c.tn, c.total())
}

/// Fraction of wrong decisions, `(fp + fn) / total`.
pub fn hamming_from_counts(c: &ConfusionCounts) -> MetricValue {
    MetricValue::ratio(c.errors(), c.total())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HammingScope {
    Label(usize),
    All,
}

pub fn hamming_loss(
    truth: &Array2<bool>,
    pred: &Array2<bool>,
    scope: HammingScope,
) -> Result<MetricValue> {
    if truth.dim() != pred.dim() {
        return Err(Error::DimensionMismatch(format!(
            "truth is {:?}, predictions {:?}",
            truth.dim(),
            pred.dim()
        )));
    }
    let counts = match scope {
        HammingScope::Label(k) => {
            if k >= truth.ncols() {
                return Err(Error::DimensionMismatch(format!(
                    "label index {k} out of range for {} labels",
                    truth.ncols()
                )));
            }
            confusion(truth.column(k), pred.column(k))?
        }
        HammingScope::All => (0..truth.ncols())
            .map(|k| confusion(truth.column(k), pred.column(k)))
            .sum::<Result<ConfusionCounts>>()?,
    };
    Ok(hamming_from_counts(&counts))
}
