//! Confidence intervals for binomial proportions on the logit scale.
//!
//! With `p = s / n`, the bounds are
//! `expit(logit(p) -/+ z * sqrt(1 / (n p (1 - p))))`. They are undefined
//! when `p` is 0 or 1, where the logit diverges.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::metrics::MetricValue;

pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub confidence: f64,
    pub z: f64,
    pub n: u64,
    pub successes: u64,
}

impl IntervalEstimate {
    pub fn bounds(&self) -> Option<(f64, f64)> {
        self.lower.zip(self.upper)
    }

    pub fn width(&self) -> Option<f64> {
        self.bounds().map(|(l, u)| u - l)
    }
}

/// Two-sided standard normal quantile for `confidence`.
pub fn z_for(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidValue(format!(
            "confidence {confidence} outside (0, 1)"
        )));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(1.0 - (1.0 - confidence) / 2.0))
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn logit_interval(successes: u64, n: u64, confidence: f64) -> Result<IntervalEstimate> {
    if n == 0 {
        return Err(Error::InvalidValue("interval over zero trials".into()));
    }
    if successes > n {
        return Err(Error::InvalidValue(format!(
            "{successes} successes out of {n} trials"
        )));
    }
    let z = z_for(confidence)?;
    let point = successes as f64 / n as f64;
    let (lower, upper) = if successes == 0 || successes == n {
        (None, None)
    } else {
        let centre = logit(point);
        let se = (1.0 / (n as f64 * point * (1.0 - point))).sqrt();
        (Some(expit(centre - z * se)), Some(expit(centre + z * se)))
    };
    Ok(IntervalEstimate {
        point,
        lower,
        upper,
        confidence,
        z,
        n,
        successes,
    })
}

/// Interval for a count-based metric (sensitivity, specificity, precision,
/// Hamming loss), treating it as a binomial proportion.
pub fn interval_for_metric(metric: &MetricValue, confidence: f64) -> Result<IntervalEstimate> {
    match (metric.value, metric.fraction) {
        (Some(_), Some(f)) => logit_interval(f.numerator, f.denominator, confidence),
        (None, _) => Err(Error::UndefinedMetric("no interval for an undefined metric".into())),
        (Some(_), None) => Err(Error::UndefinedMetric(
            "metric has no underlying proportion".into(),
        )),
    }
}
