//! Precision-recall and ROC curves from a descending threshold sweep.
//!
//! Items sharing a score cross the threshold together, so tied inputs give
//! a single point per distinct score. Average precision uses the step rule
//! `sum (recall_n - recall_{n-1}) * precision_n`, not trapezoids. AUROC is
//! the trapezoid area over (FPR, TPR), evaluated in integer arithmetic so it
//! coincides with the Mann-Whitney pair statistic (ties counted one half).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    PrecisionRecall,
    Roc,
}

/// One operating point. `threshold` is an observed score, or `+inf` for the
/// leading sentinel where nothing is predicted positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
    pub threshold: f64,
    pub tp: u64,
    pub fp: u64,
}

impl CurvePoint {
    pub fn is_sentinel(&self) -> bool {
        self.threshold.is_infinite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub kind: CurveKind,
    pub points: Vec<CurvePoint>,
    pub area: MetricValue,
    pub positives: u64,
    pub negatives: u64,
}

impl Curve {
    pub fn is_defined(&self) -> bool {
        self.area.is_defined()
    }
}

/// Cumulative counts after admitting every item scoring at least `threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SweepStep {
    pub threshold: f64,
    pub tp: u64,
    pub fp: u64,
}

pub(crate) fn sweep(scores: &[f64], truth: &[bool]) -> Result<(Vec<SweepStep>, u64, u64)> {
    if scores.len() != truth.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores for {} truth values",
            scores.len(),
            truth.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::EmptyInput("no scores to sweep".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("scores".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut steps: Vec<SweepStep> = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    for (pos, &i) in order.iter().enumerate() {
        if truth[i] {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_group = order
            .get(pos + 1)
            .is_none_or(|&j| scores[j].partial_cmp(&scores[i]) != Some(Ordering::Equal));
        if last_of_group {
            steps.push(SweepStep {
                threshold: scores[i],
                tp,
                fp,
            });
        }
    }
    Ok((steps, tp, fp))
}

pub fn pr_curve(scores: &[f64], truth: &[bool]) -> Result<Curve> {
    let (steps, positives, negatives) = sweep(scores, truth)?;
    let mut curve = Curve {
        kind: CurveKind::PrecisionRecall,
        points: Vec::new(),
        area: MetricValue::undefined(),
        positives,
        negatives,
    };
    if positives == 0 {
        return Ok(curve);
    }
    let p = positives as f64;
    curve.points.push(CurvePoint {
        x: 0.0,
        y: 1.0,
        threshold: f64::INFINITY,
        tp: 0,
        fp: 0,
    });
    curve.points.extend(steps.iter().map(|s| CurvePoint {
        x: s.tp as f64 / p,
        y: s.tp as f64 / (s.tp + s.fp) as f64,
        threshold: s.threshold,
        tp: s.tp,
        fp: s.fp,
    }));
    curve.area = average_precision(&curve)?;
    Ok(curve)
}

/// Step-interpolated area under a precision-recall curve.
pub fn average_precision(curve: &Curve) -> Result<MetricValue> {
    if curve.kind != CurveKind::PrecisionRecall {
        return Err(Error::InvalidValue("average precision needs a PR curve".into()));
    }
    if curve.positives == 0 || curve.points.is_empty() {
        return Err(Error::UndefinedMetric(
            "precision-recall curve without positives".into(),
        ));
    }
    let mut prev_tp = 0u64;
    let mut sum = 0.0;
    for pt in &curve.points {
        if pt.tp > prev_tp {
            sum += (pt.tp - prev_tp) as f64 * pt.y;
            prev_tp = pt.tp;
        }
    }
    Ok(MetricValue::area(sum / curve.positives as f64))
}

pub fn roc_curve(scores: &[f64], truth: &[bool]) -> Result<Curve> {
    let (steps, positives, negatives) = sweep(scores, truth)?;
    let mut curve = Curve {
        kind: CurveKind::Roc,
        points: Vec::new(),
        area: MetricValue::undefined(),
        positives,
        negatives,
    };
    if positives == 0 || negatives == 0 {
        return Ok(curve);
    }
    let (p, n) = (positives as f64, negatives as f64);
    curve.points.push(CurvePoint {
        x: 0.0,
        y: 0.0,
        threshold: f64::INFINITY,
        tp: 0,
        fp: 0,
    });
    curve.points.extend(steps.iter().map(|s| CurvePoint {
        x: s.fp as f64 / n,
        y: s.tp as f64 / p,
        threshold: s.threshold,
        tp: s.tp,
        fp: s.fp,
    }));
    curve.area = auroc(&curve)?;
    Ok(curve)
}

/// Trapezoid area under a ROC curve.
pub fn auroc(curve: &Curve) -> Result<MetricValue> {
    if curve.kind != CurveKind::Roc {
        return Err(Error::InvalidValue("AUROC needs a ROC curve".into()));
    }
    if curve.positives == 0 || curve.negatives == 0 || curve.points.is_empty() {
        return Err(Error::UndefinedMetric(
            "ROC curve needs both positives and negatives".into(),
        ));
    }
    // Twice the area, scaled by positives * negatives, is an integer.
    let doubled: u128 = curve
        .points
        .windows(2)
        .map(|w| (w[1].fp - w[0].fp) as u128 * (w[1].tp + w[0].tp) as u128)
        .sum();
    let scale = 2 * curve.positives as u128 * curve.negatives as u128;
    Ok(MetricValue::area(doubled as f64 / scale as f64))
}

/// `(recall, threshold)` pairs: for each achieved recall, the largest
/// threshold achieving it.
pub fn threshold_trace(curve: &Curve) -> Result<Vec<(f64, f64)>> {
    if !curve.is_defined() {
        return Err(Error::UndefinedMetric("threshold trace of an undefined curve".into()));
    }
    let p = curve.positives as f64;
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut last_tp = None;
    for pt in curve.points.iter().filter(|pt| !pt.is_sentinel()) {
        if last_tp != Some(pt.tp) {
            trace.push((pt.tp as f64 / p, pt.threshold));
            last_tp = Some(pt.tp);
        }
    }
    Ok(trace)
}
