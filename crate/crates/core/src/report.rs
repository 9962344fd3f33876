//! Full evaluation: per-label, per-cohort metric cells with intervals and
//! the raw counts behind them, plus a pooled row summing counts across
//! labels.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::curves::{pr_curve, roc_curve};
use crate::error::{Error, Result};
use crate::intervals::{interval_for_metric, IntervalEstimate};
use crate::metrics::{
    confusion, hamming_from_counts, precision, sensitivity, specificity, ConfusionCounts,
    MetricValue,
};
use crate::model::{
    binarize, CardinalityCohort, CohortSelector, GroundTruthMatrix, LabelSet, ScoreMatrix,
    ThresholdVector,
};

/// Row name used for counts pooled over every label.
pub const POOLED_LABEL: &str = "All";

pub const POOLED_CAVEAT: &str = "pooled row sums counts over labels; labels on one image \
are not independent, so pooled intervals are not robust";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UndefinedReason {
    NoPositives,
    NoNegatives,
    /// Nothing was predicted positive, so no true positive could occur.
    NoTruePositivePossible,
    EmptyCohort,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    AveragePrecision,
    Auroc,
    Sensitivity,
    Specificity,
    Precision,
    HammingLoss,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::AveragePrecision,
        Metric::Auroc,
        Metric::Sensitivity,
        Metric::Specificity,
        Metric::Precision,
        Metric::HammingLoss,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Metric::AveragePrecision => "average_precision",
            Metric::Auroc => "auroc",
            Metric::Sensitivity => "sensitivity",
            Metric::Specificity => "specificity",
            Metric::Precision => "precision",
            Metric::HammingLoss => "hamming_loss",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Metric::AveragePrecision => "Average precision",
            Metric::Auroc => "AUROC",
            Metric::Sensitivity => "Sensitivity",
            Metric::Specificity => "Specificity",
            Metric::Precision => "Precision",
            Metric::HammingLoss => "Hamming loss",
        }
    }

    pub fn is_curve_metric(self) -> bool {
        matches!(self, Metric::AveragePrecision | Metric::Auroc)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| Error::InvalidValue(format!("unknown metric `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricEntry {
    pub value: MetricValue,
    pub interval: Option<IntervalEstimate>,
    pub reason: Option<UndefinedReason>,
}

impl MetricEntry {
    fn undefined(reason: UndefinedReason) -> Self {
        Self {
            value: MetricValue::undefined(),
            interval: None,
            reason: Some(reason),
        }
    }

    fn proportion(value: MetricValue, if_undefined: UndefinedReason, confidence: f64) -> Self {
        if value.is_defined() {
            Self {
                interval: interval_for_metric(&value, confidence).ok(),
                value,
                reason: None,
            }
        } else {
            Self {
                value,
                interval: None,
                reason: Some(if_undefined),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub label: usize,
    pub cohort: usize,
    pub counts: ConfusionCounts,
    pub sensitivity: MetricEntry,
    pub specificity: MetricEntry,
    pub precision: MetricEntry,
    pub hamming_loss: MetricEntry,
    pub average_precision: MetricEntry,
    pub auroc: MetricEntry,
}

impl ReportCell {
    pub fn metric(&self, m: Metric) -> &MetricEntry {
        match m {
            Metric::AveragePrecision => &self.average_precision,
            Metric::Auroc => &self.auroc,
            Metric::Sensitivity => &self.sensitivity,
            Metric::Specificity => &self.specificity,
            Metric::Precision => &self.precision,
            Metric::HammingLoss => &self.hamming_loss,
        }
    }
}

/// Counts pooled over labels for one cohort. Curve metrics are not pooled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PooledCell {
    pub cohort: usize,
    pub counts: ConfusionCounts,
    pub sensitivity: MetricEntry,
    pub specificity: MetricEntry,
    pub precision: MetricEntry,
    pub hamming_loss: MetricEntry,
}

impl PooledCell {
    pub fn metric(&self, m: Metric) -> Option<&MetricEntry> {
        match m {
            Metric::Sensitivity => Some(&self.sensitivity),
            Metric::Specificity => Some(&self.specificity),
            Metric::Precision => Some(&self.precision),
            Metric::HammingLoss => Some(&self.hamming_loss),
            Metric::AveragePrecision | Metric::Auroc => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub thresholds: ThresholdVector,
    pub image_ids: Vec<String>,
    pub confidence: f64,
    /// Only set when supplied by the caller; reports are otherwise a pure
    /// function of their inputs.
    pub timestamp: Option<String>,
    pub pooled_caveat: String,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub labels: LabelSet,
    pub cohorts: Vec<CardinalityCohort>,
    /// Label-major: `cells[label * cohorts.len() + cohort]`.
    pub cells: Vec<ReportCell>,
    pub pooled: Vec<PooledCell>,
    pub metadata: ReportMetadata,
}

impl EvaluationReport {
    pub fn cell(&self, label: usize, cohort: usize) -> &ReportCell {
        &self.cells[label * self.cohorts.len() + cohort]
    }

    pub fn cohort_index(&self, selector: CohortSelector) -> Option<usize> {
        self.cohorts.iter().position(|c| c.selector == selector)
    }

    /// Cell lookup by label name and cohort selector.
    pub fn find(&self, label: &str, selector: CohortSelector) -> Option<&ReportCell> {
        let l = self.labels.index_of(label)?;
        let c = self.cohort_index(selector)?;
        Some(self.cell(l, c))
    }

    /// Value of `metric` for a label (or [`POOLED_LABEL`]) in a cohort.
    pub fn value(&self, label: &str, selector: CohortSelector, metric: Metric) -> Option<f64> {
        self.entry(label, selector, metric)?.value.value
    }

    pub fn entry(&self, label: &str, selector: CohortSelector, metric: Metric) -> Option<&MetricEntry> {
        let c = self.cohort_index(selector)?;
        if label == POOLED_LABEL && self.labels.index_of(label).is_none() {
            return self.pooled[c].metric(metric);
        }
        self.find(label, selector).map(|cell| cell.metric(metric))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvaluateOptions {
    pub confidence: f64,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        Self {
            confidence: crate::intervals::DEFAULT_CONFIDENCE,
        }
    }
}

fn count_entries(
    counts: &ConfusionCounts,
    empty: bool,
    confidence: f64,
) -> [MetricEntry; 4] {
    if empty {
        return [MetricEntry::undefined(UndefinedReason::EmptyCohort); 4];
    }
    [
        MetricEntry::proportion(sensitivity(counts), UndefinedReason::NoPositives, confidence),
        MetricEntry::proportion(specificity(counts), UndefinedReason::NoNegatives, confidence),
        MetricEntry::proportion(
            precision(counts),
            UndefinedReason::NoTruePositivePossible,
            confidence,
        ),
        MetricEntry::proportion(
            hamming_from_counts(counts),
            UndefinedReason::EmptyCohort,
            confidence,
        ),
    ]
}

fn curve_reason(counts: &ConfusionCounts) -> Option<UndefinedReason> {
    if counts.total() == 0 {
        Some(UndefinedReason::EmptyCohort)
    } else if counts.positives() == 0 {
        Some(UndefinedReason::NoPositives)
    } else if counts.negatives() == 0 {
        Some(UndefinedReason::NoNegatives)
    } else {
        None
    }
}

pub fn evaluate(
    test_scores: &ScoreMatrix,
    test_truth: &GroundTruthMatrix,
    thresholds: &ThresholdVector,
    cohorts: &[CardinalityCohort],
    options: EvaluateOptions,
) -> Result<EvaluationReport> {
    if test_truth.n_images() == 0 {
        return Err(Error::EmptyInput("test set has no images".into()));
    }
    let scores = test_scores.aligned_to(test_truth)?;
    let predictions = binarize(&scores, thresholds)?;
    let row_of: HashMap<&str, usize> = test_truth
        .image_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let k = test_truth.labels().len();
    let mut cohort_rows = Vec::with_capacity(cohorts.len());
    for cohort in cohorts {
        if let CohortSelector::Exactly(c) = cohort.selector {
            if c > k {
                return Err(Error::CardinalityOutOfRange {
                    requested: c,
                    labels: k,
                });
            }
        }
        let rows = cohort
            .member_ids
            .iter()
            .map(|id| {
                row_of
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::MissingId(id.clone()))
            })
            .collect::<Result<Vec<usize>>>()?;
        cohort_rows.push(rows);
    }

    let confidence = options.confidence;
    let mut cells = Vec::with_capacity(k * cohorts.len());
    for label in 0..k {
        for (ci, rows) in cohort_rows.iter().enumerate() {
            let truth: Vec<bool> = rows.iter().map(|&r| test_truth.truth()[[r, label]]).collect();
            let pred: Vec<bool> = rows
                .iter()
                .map(|&r| predictions.predicted[[r, label]])
                .collect();
            let score: Vec<f64> = rows.iter().map(|&r| scores.scores()[[r, label]]).collect();
            let counts = confusion(
                ndarray::ArrayView1::from(&truth),
                ndarray::ArrayView1::from(&pred),
            )?;
            let [sens, spec, prec, ham] = count_entries(&counts, rows.is_empty(), confidence);
            let (ap, auc) = match curve_reason(&counts) {
                Some(reason) => (
                    MetricEntry::undefined(reason),
                    MetricEntry::undefined(reason),
                ),
                None => (
                    MetricEntry {
                        value: pr_curve(&score, &truth)?.area,
                        interval: None,
                        reason: None,
                    },
                    MetricEntry {
                        value: roc_curve(&score, &truth)?.area,
                        interval: None,
                        reason: None,
                    },
                ),
            };
            cells.push(ReportCell {
                label,
                cohort: ci,
                counts,
                sensitivity: sens,
                specificity: spec,
                precision: prec,
                hamming_loss: ham,
                average_precision: ap,
                auroc: auc,
            });
        }
    }

    let pooled = pool(&cells, k, cohort_rows.len(), |ci| cohort_rows[ci].is_empty(), confidence);

    Ok(EvaluationReport {
        labels: test_truth.labels().clone(),
        cohorts: cohorts.to_vec(),
        cells,
        pooled,
        metadata: ReportMetadata {
            thresholds: thresholds.clone(),
            image_ids: test_truth.image_ids().to_vec(),
            confidence,
            timestamp: None,
            pooled_caveat: POOLED_CAVEAT.to_string(),
            notes: Vec::new(),
        },
    })
}

fn pool(
    cells: &[ReportCell],
    k: usize,
    n_cohorts: usize,
    is_empty: impl Fn(usize) -> bool,
    confidence: f64,
) -> Vec<PooledCell> {
    (0..n_cohorts)
        .map(|ci| {
            let counts: ConfusionCounts = (0..k).map(|l| cells[l * n_cohorts + ci].counts).sum();
            let [sens, spec, prec, ham] = count_entries(&counts, is_empty(ci), confidence);
            PooledCell {
                cohort: ci,
                counts,
                sensitivity: sens,
                specificity: spec,
                precision: prec,
                hamming_loss: ham,
            }
        })
        .collect()
}

/// Recomputes every count-derived number in the report and checks the
/// structural count identities. Returns the first inconsistency found.
pub fn self_check(report: &EvaluationReport) -> Result<()> {
    let k = report.labels.len();
    let nc = report.cohorts.len();
    let fail = |msg: String| Err(Error::SelfCheck(msg));
    if report.cells.len() != k * nc {
        return fail(format!("{} cells for {k} labels x {nc} cohorts", report.cells.len()));
    }
    if report.pooled.len() != nc {
        return fail(format!("{} pooled cells for {nc} cohorts", report.pooled.len()));
    }
    let confidence = report.metadata.confidence;

    for (idx, cell) in report.cells.iter().enumerate() {
        let (label, cohort) = (idx / nc, idx % nc);
        let name = || format!("{} / {}", report.labels.name(label), report.cohorts[cohort].selector);
        if cell.label != label || cell.cohort != cohort {
            return fail(format!("cell {idx} is out of order"));
        }
        let size = report.cohorts[cohort].member_ids.len() as u64;
        if cell.counts.total() != size {
            return fail(format!(
                "{}: counts total {} but cohort has {size} images",
                name(),
                cell.counts.total()
            ));
        }
        let expected = count_entries(&cell.counts, size == 0, confidence);
        let stored = [&cell.sensitivity, &cell.specificity, &cell.precision, &cell.hamming_loss];
        for (m, (e, s)) in [
            Metric::Sensitivity,
            Metric::Specificity,
            Metric::Precision,
            Metric::HammingLoss,
        ]
        .iter()
        .zip(expected.iter().zip(stored))
        {
            if e != s {
                return fail(format!("{}: {m} does not match its counts", name()));
            }
        }
        let reason = curve_reason(&cell.counts);
        for m in [Metric::AveragePrecision, Metric::Auroc] {
            let entry = cell.metric(m);
            match (reason, entry.value.value) {
                (Some(r), None) if entry.reason == Some(r) => {}
                (None, Some(v)) if (0.0..=1.0).contains(&v) && entry.reason.is_none() => {}
                _ => return fail(format!("{}: {m} inconsistent with class counts", name())),
            }
        }
    }

    for (ci, p) in report.pooled.iter().enumerate() {
        let counts: ConfusionCounts = (0..k).map(|l| report.cell(l, ci).counts).sum();
        if p.counts != counts || p.cohort != ci {
            return fail(format!(
                "pooled counts for cohort {} are not the label sum",
                report.cohorts[ci].selector
            ));
        }
        let expected = count_entries(&counts, report.cohorts[ci].member_ids.is_empty(), confidence);
        if expected != [p.sensitivity, p.specificity, p.precision, p.hamming_loss] {
            return fail(format!(
                "pooled metrics for cohort {} do not match counts",
                report.cohorts[ci].selector
            ));
        }
    }

    // count additivity across cardinality cohorts
    let all = report.cohort_index(CohortSelector::All);
    let more = report.cohort_index(CohortSelector::MoreThanOne);
    let exact: Option<Vec<usize>> = (0..=k)
        .map(|c| report.cohort_index(CohortSelector::Exactly(c)))
        .collect();
    if let Some(exact) = exact {
        for label in 0..k {
            let sum_from = |from: usize| -> ConfusionCounts {
                exact[from..].iter().map(|&ci| report.cell(label, ci).counts).sum()
            };
            if let Some(all) = all {
                if sum_from(0) != report.cell(label, all).counts {
                    return fail(format!(
                        "{}: cardinality cohorts do not sum to the full cohort",
                        report.labels.name(label)
                    ));
                }
            }
            if let Some(more) = more {
                if sum_from(2.min(exact.len())) != report.cell(label, more).counts {
                    return fail(format!(
                        "{}: cohorts 2..{k} do not sum to the >1 cohort",
                        report.labels.name(label)
                    ));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub cohort: CohortSelector,
    pub metric: Metric,
    pub a: Option<f64>,
    pub b: Option<f64>,
    /// `b - a` when both are defined.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn get(&self, label: &str, cohort: CohortSelector, metric: Metric) -> Option<&ComparisonRow> {
        self.rows
            .iter()
            .find(|r| r.label == label && r.cohort == cohort && r.metric == metric)
    }
}

/// Side-by-side cells of two reports over the same labels and cohorts.
pub fn compare_networks(a: &EvaluationReport, b: &EvaluationReport) -> Result<ComparisonTable> {
    if a.labels != b.labels {
        return Err(Error::IncompatibleReports(format!(
            "labels {:?} vs {:?}",
            a.labels.names(),
            b.labels.names()
        )));
    }
    let selectors = |r: &EvaluationReport| r.cohorts.iter().map(|c| c.selector).collect::<Vec<_>>();
    if selectors(a) != selectors(b) {
        return Err(Error::IncompatibleReports("cohorts differ".into()));
    }
    let mut rows = Vec::new();
    let names = a
        .labels
        .names()
        .iter()
        .map(String::as_str)
        .chain([POOLED_LABEL]);
    for label in names {
        for cohort in selectors(a) {
            for metric in Metric::ALL {
                let (Some(ea), Some(eb)) = (a.entry(label, cohort, metric), b.entry(label, cohort, metric))
                else {
                    continue;
                };
                let (va, vb) = (ea.value.value, eb.value.value);
                rows.push(ComparisonRow {
                    label: label.to_string(),
                    cohort,
                    metric,
                    a: va,
                    b: vb,
                    delta: va.zip(vb).map(|(x, y)| y - x),
                });
            }
        }
    }
    Ok(ComparisonTable { rows })
}

/// An externally published value to check a report against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub label: String,
    pub cohort: CohortSelector,
    pub metric: Metric,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub reference: ReferenceValue,
    pub computed: Option<f64>,
    pub counts: Option<ConfusionCounts>,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.reference;
        let computed = self
            .computed
            .map_or_else(|| "undefined".to_string(), |v| format!("{v:.3}"));
        write!(
            f,
            "{} {} (cohort {}): computed {} from counts",
            r.label,
            r.metric.title(),
            r.cohort,
            computed
        )?;
        if let Some(c) = self.counts {
            write!(f, " [TN={} FP={} FN={} TP={}]", c.tn, c.fp, c.fn_, c.tp)?;
        }
        write!(f, "; reference value {:.3}", r.value)
    }
}

/// Reference values the report does not reproduce within `tolerance`.
pub fn reference_discrepancies(
    report: &EvaluationReport,
    reference: &[ReferenceValue],
    tolerance: f64,
) -> Vec<Discrepancy> {
    reference
        .iter()
        .filter_map(|r| {
            let entry = report.entry(&r.label, r.cohort, r.metric);
            let computed = entry.and_then(|e| e.value.value);
            let agrees = computed.is_some_and(|v| (v - r.value).abs() <= tolerance);
            if agrees {
                return None;
            }
            let counts = report.cohort_index(r.cohort).and_then(|ci| {
                if r.label == POOLED_LABEL {
                    Some(report.pooled[ci].counts)
                } else {
                    report.labels.index_of(&r.label).map(|l| report.cell(l, ci).counts)
                }
            });
            Some(Discrepancy {
                reference: r.clone(),
                computed,
                counts,
            })
        })
        .collect()
}

/// Records each discrepancy as a note in the report metadata.
pub fn annotate_discrepancies(report: &mut EvaluationReport, discrepancies: &[Discrepancy]) {
    report
        .metadata
        .notes
        .extend(discrepancies.iter().map(|d| d.to_string()));
}
