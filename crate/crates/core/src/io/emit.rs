//! Report emission: aligned-text tables, CSV tables and JSON.
//!
//! Cell conventions: values are shown to three decimals, except exact 0 and
//! 1 which print bare. Undefined cells print as an en dash. Intervals print
//! as `(lower - upper)`, or `( - )` when the point is 0 or 1 and the logit
//! interval does not exist.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::report::{self_check, EvaluationReport, Metric, MetricEntry, POOLED_LABEL};

use super::write_atomic;

pub const UNDEFINED_CELL: &str = "–";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Text,
}

pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v == 1.0 {
        "1".into()
    } else {
        format!("{v:.3}")
    }
}

pub fn format_entry(entry: &MetricEntry) -> String {
    let Some(v) = entry.value.value else {
        return UNDEFINED_CELL.into();
    };
    let point = format_value(v);
    match &entry.interval {
        None => point,
        Some(iv) => match iv.bounds() {
            Some((lo, hi)) => format!("{point} ({lo:.3} - {hi:.3})"),
            None => format!("{point} ( - )"),
        },
    }
}

fn row_names(report: &EvaluationReport) -> Vec<&str> {
    report
        .labels
        .names()
        .iter()
        .map(String::as_str)
        .chain([POOLED_LABEL])
        .collect()
}

fn cohort_names(report: &EvaluationReport) -> Vec<String> {
    report.cohorts.iter().map(|c| c.selector.to_string()).collect()
}

/// Formatted cells for one metric: `rows[label][cohort]`, with the pooled
/// row last. Pooled curve metrics are undefined.
pub fn metric_table(report: &EvaluationReport, metric: Metric) -> Vec<Vec<String>> {
    let nc = report.cohorts.len();
    let mut rows: Vec<Vec<String>> = (0..report.labels.len())
        .map(|l| (0..nc).map(|c| format_entry(report.cell(l, c).metric(metric))).collect())
        .collect();
    rows.push(
        report
            .pooled
            .iter()
            .map(|p| p.metric(metric).map_or_else(|| UNDEFINED_CELL.into(), format_entry))
            .collect(),
    );
    rows
}

fn aligned(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let ncol = header.len();
    let mut widths = vec![0usize; ncol];
    for r in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut line = |r: &[String]| {
        let mut s = String::new();
        for (i, (cell, w)) in r.iter().zip(&widths).enumerate() {
            let pad = w - cell.chars().count();
            if i == 0 {
                s.push_str(cell);
                s.extend(std::iter::repeat_n(' ', pad));
            } else {
                s.push_str("  ");
                s.extend(std::iter::repeat_n(' ', pad));
                s.push_str(cell);
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(header);
    for r in rows {
        line(r);
    }
}

pub fn render_text(report: &EvaluationReport) -> String {
    let mut out = String::new();
    let cohorts = cohort_names(report);
    let names = row_names(report);
    let header: Vec<String> = std::iter::once("label".to_string())
        .chain(cohorts.iter().cloned())
        .collect();
    writeln!(
        out,
        "{} test images, {:.0}% intervals",
        report.metadata.image_ids.len(),
        report.metadata.confidence * 100.0
    )
    .unwrap();
    let thresholds: Vec<String> = report
        .labels
        .names()
        .iter()
        .zip(report.metadata.thresholds.as_slice())
        .map(|(n, t)| format!("{n}={t}"))
        .collect();
    writeln!(out, "thresholds: {}", thresholds.join(" ")).unwrap();
    if let Some(ts) = &report.metadata.timestamp {
        writeln!(out, "timestamp: {ts}").unwrap();
    }

    for metric in Metric::ALL {
        writeln!(out, "\n{}", metric.title()).unwrap();
        let rows: Vec<Vec<String>> = names
            .iter()
            .zip(metric_table(report, metric))
            .map(|(n, cells)| std::iter::once(n.to_string()).chain(cells).collect())
            .collect();
        aligned(&mut out, &header, &rows);
    }

    writeln!(out, "\nCounts").unwrap();
    let mut rows = Vec::new();
    for (name, per_cohort) in names.iter().zip(counts_by_row(report)) {
        for (k, tag) in ["TN", "FP", "FN", "TP"].iter().enumerate() {
            let mut row = vec![format!("{name} {tag}")];
            row.extend(per_cohort.iter().map(|c| c[k].to_string()));
            rows.push(row);
        }
    }
    aligned(&mut out, &header, &rows);

    writeln!(out, "\nNote: {}", report.metadata.pooled_caveat).unwrap();
    for note in &report.metadata.notes {
        writeln!(out, "Note: {note}").unwrap();
    }
    out
}

fn counts_by_row(report: &EvaluationReport) -> Vec<Vec<[u64; 4]>> {
    let nc = report.cohorts.len();
    let quad = |c: &crate::metrics::ConfusionCounts| [c.tn, c.fp, c.fn_, c.tp];
    let mut rows: Vec<Vec<[u64; 4]>> = (0..report.labels.len())
        .map(|l| (0..nc).map(|c| quad(&report.cell(l, c).counts)).collect())
        .collect();
    rows.push(report.pooled.iter().map(|p| quad(&p.counts)).collect());
    rows
}

fn csv_string(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::InvalidValue(format!("csv: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::InvalidValue(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// `metric,label,<cohort>...`, one row per metric and label.
pub fn render_metrics_csv(report: &EvaluationReport) -> Result<String> {
    let header: Vec<String> = ["metric".to_string(), "label".to_string()]
        .into_iter()
        .chain(cohort_names(report))
        .collect();
    let names = row_names(report);
    let mut rows = Vec::new();
    for metric in Metric::ALL {
        for (name, cells) in names.iter().zip(metric_table(report, metric)) {
            let mut row = vec![metric.key().to_string(), name.to_string()];
            row.extend(cells);
            rows.push(row);
        }
    }
    csv_string(&header, &rows)
}

/// `label,count,<cohort>...` with rows TN, FP, FN, TP per label.
pub fn render_counts_csv(report: &EvaluationReport) -> Result<String> {
    let header: Vec<String> = ["label".to_string(), "count".to_string()]
        .into_iter()
        .chain(cohort_names(report))
        .collect();
    let mut rows = Vec::new();
    for (name, per_cohort) in row_names(report).iter().zip(counts_by_row(report)) {
        for (k, tag) in ["TN", "FP", "FN", "TP"].iter().enumerate() {
            let mut row = vec![name.to_string(), tag.to_string()];
            row.extend(per_cohort.iter().map(|c| c[k].to_string()));
            rows.push(row);
        }
    }
    csv_string(&header, &rows)
}

pub fn render_json(report: &EvaluationReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_report_json(text: &str) -> Result<EvaluationReport> {
    Ok(serde_json::from_str(text)?)
}

/// Self-checks the report, then writes `report.json` plus the requested
/// table formats into `dir`. Nothing is written if the check fails.
pub fn emit_report(
    report: &EvaluationReport,
    dir: &Path,
    formats: &[ReportFormat],
) -> Result<Vec<PathBuf>> {
    self_check(report)?;
    let mut files: Vec<(PathBuf, String)> = vec![(dir.join("report.json"), render_json(report)?)];
    if formats.contains(&ReportFormat::Text) {
        files.push((dir.join("report.txt"), render_text(report)));
    }
    if formats.contains(&ReportFormat::Csv) {
        files.push((dir.join("metrics.csv"), render_metrics_csv(report)?));
        files.push((dir.join("counts.csv"), render_counts_csv(report)?));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (path, text) in &files {
        write_atomic(path, text.as_bytes())?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
