//! Seeded synthetic truth/score pairs with a known expected AUROC.
//!
//! For separability `s >= 0` let `d = s / (1 + s)` and `w = 1 / (1 + s)`.
//! Negative scores are uniform on `[0, w)` and positive scores uniform on
//! `[d, d + w)`, so both lie in `[0, 1]`. With `r = d / w = s`, the chance a
//! positive outscores a negative is
//!
//! ```text
//! AUROC(s) = 1 - (1 - s)^2 / 2   for 0 <= s < 1
//!          = 1                    for s >= 1
//! ```
//!
//! `s = 0` gives identical distributions (AUROC 0.5); `s = inf` puts every
//! positive at 1 and every negative at 0.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{GroundTruthMatrix, LabelSet, ScoreMatrix};

use super::config::KeyValues;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub labels: LabelSet,
    pub prevalence: Vec<f64>,
    pub separability: Vec<f64>,
    pub n: usize,
    pub seed: u64,
}

pub fn expected_auroc(separability: f64) -> f64 {
    if separability >= 1.0 {
        1.0
    } else {
        1.0 - (1.0 - separability).powi(2) / 2.0
    }
}

/// Inverse of [`expected_auroc`] on `[0.5, 1]`.
pub fn separability_for_auroc(auroc: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&auroc) {
        return Err(Error::InvalidValue(format!(
            "expected AUROC {auroc} outside [0.5, 1]"
        )));
    }
    Ok(1.0 - (2.0 * (1.0 - auroc)).sqrt())
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let k = self.labels.len();
        if self.prevalence.len() != k || self.separability.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "{} labels, {} prevalences, {} separabilities",
                k,
                self.prevalence.len(),
                self.separability.len()
            )));
        }
        if let Some(p) = self.prevalence.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(Error::InvalidValue(format!("prevalence {p} not inside (0, 1)")));
        }
        if let Some(s) = self.separability.iter().find(|s| s.is_nan() || **s < 0.0) {
            return Err(Error::InvalidValue(format!("separability {s} is negative or NaN")));
        }
        Ok(())
    }

    /// Reads `labels`, `prevalence`, `separability`, `n` and `seed` keys.
    /// Single-valued `prevalence`/`separability` apply to every label.
    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        let labels = match kv.get_list::<String>("labels")? {
            Some(names) => LabelSet::new(names)?,
            None => LabelSet::default(),
        };
        let k = labels.len();
        let broadcast = |key: &str| -> Result<Vec<f64>> {
            let v = kv
                .get_list::<f64>(key)?
                .ok_or_else(|| Error::Config(format!("missing key `{key}`")))?;
            Ok(if v.len() == 1 { vec![v[0]; k] } else { v })
        };
        let spec = Self {
            prevalence: broadcast("prevalence")?,
            separability: broadcast("separability")?,
            n: kv
                .get("n")?
                .ok_or_else(|| Error::Config("missing key `n`".into()))?,
            seed: kv.get("seed")?.unwrap_or(0),
            labels,
        };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(GroundTruthMatrix, ScoreMatrix)> {
    spec.validate()?;
    let k = spec.labels.len();
    let width = spec.n.max(1).to_string().len();
    let ids: Vec<String> = (1..=spec.n).map(|i| format!("syn-{i:0width$}")).collect();
    let shapes: Vec<(f64, f64)> = spec
        .separability
        .iter()
        .map(|&s| {
            if s.is_infinite() {
                (1.0, 0.0)
            } else {
                (s / (1.0 + s), 1.0 / (1.0 + s))
            }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut truth = Array2::from_elem((spec.n, k), false);
    let mut scores = Array2::zeros((spec.n, k));
    for i in 0..spec.n {
        for label in 0..k {
            let positive = rng.gen::<f64>() < spec.prevalence[label];
            let u: f64 = rng.gen();
            let (offset, width) = shapes[label];
            truth[[i, label]] = positive;
            scores[[i, label]] = if positive { offset + width * u } else { width * u };
        }
    }
    Ok((
        GroundTruthMatrix::new(spec.labels.clone(), ids.clone(), truth)?,
        ScoreMatrix::new(spec.labels.clone(), ids, scores)?,
    ))
}
