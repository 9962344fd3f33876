//! Comma-separated text formats: label files, score files, thresholds,
//! split assignments and reference values.
//!
//! Label and score files share one layout: a header
//! `image_id,<label1>,...,<labelK>` followed by one row per image. Label
//! cells are `0` or `1`; score cells are decimal probabilities. Scores are
//! written with the shortest representation that parses back to the same
//! `f64`, so a write/parse cycle is lossless.

use std::path::Path;
use std::str::FromStr;

use csv::{ReaderBuilder, StringRecord};
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{
    GroundTruthMatrix, LabelSet, Partition, ScoreMatrix, SplitAssignment, ThresholdVector,
};
use crate::report::ReferenceValue;

use super::read_to_string;

const ID_COLUMN: &str = "image_id";

fn parse_err(source: &str, line: u64, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        column,
        message: message.into(),
    }
}

/// Records with their 1-based line numbers. Blank lines are skipped.
fn records(text: &str, source: &str) -> Result<Vec<(u64, StringRecord)>> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::None)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(source, line, 1, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        out.push((line, rec));
    }
    Ok(out)
}

fn parse_matrix<T>(
    text: &str,
    source: &str,
    cell: impl Fn(&str) -> std::result::Result<T, String>,
) -> Result<(LabelSet, Vec<String>, Vec<T>)> {
    let rows = records(text, source)?;
    let Some((hline, header)) = rows.first() else {
        return Err(parse_err(source, 1, 1, "missing header row"));
    };
    if header.get(0) != Some(ID_COLUMN) {
        return Err(parse_err(source, *hline, 1, format!("first header cell must be `{ID_COLUMN}`")));
    }
    let labels = LabelSet::new(header.iter().skip(1))
        .map_err(|e| parse_err(source, *hline, 2, e.to_string()))?;
    let k = labels.len();
    let mut ids = Vec::new();
    let mut cells = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, rec) in &rows[1..] {
        if rec.len() != k + 1 {
            return Err(parse_err(
                source,
                *line,
                rec.len().min(k + 1) + 1,
                format!("expected {} cells, found {}", k + 1, rec.len()),
            ));
        }
        let id = &rec[0];
        if id.is_empty() {
            return Err(parse_err(source, *line, 1, "empty image id"));
        }
        if !seen.insert(id.to_string()) {
            return Err(parse_err(source, *line, 1, format!("duplicate image id `{id}`")));
        }
        ids.push(id.to_string());
        for (j, raw) in rec.iter().skip(1).enumerate() {
            cells.push(cell(raw).map_err(|m| parse_err(source, *line, j + 2, m))?);
        }
    }
    Ok((labels, ids, cells))
}

pub fn parse_labels_str(text: &str, source: &str) -> Result<GroundTruthMatrix> {
    let (labels, ids, cells) = parse_matrix(text, source, |s| match s {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(format!("label cell `{other}` is not 0 or 1")),
    })?;
    let truth = Array2::from_shape_vec((ids.len(), labels.len()), cells)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    GroundTruthMatrix::new(labels, ids, truth)
}

pub fn parse_scores_str(text: &str, source: &str) -> Result<ScoreMatrix> {
    let (labels, ids, cells) = parse_matrix(text, source, |s| {
        let v: f64 = s
            .parse()
            .map_err(|_| format!("score cell `{s}` is not a number"))?;
        if v.is_finite() && (0.0..=1.0).contains(&v) {
            Ok(v)
        } else {
            Err(format!("score {s} outside [0, 1]"))
        }
    })?;
    let scores = Array2::from_shape_vec((ids.len(), labels.len()), cells)
        .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    ScoreMatrix::new(labels, ids, scores)
}

pub fn parse_labels(path: &Path) -> Result<GroundTruthMatrix> {
    parse_labels_str(&read_to_string(path)?, &path.display().to_string())
}

pub fn parse_scores(path: &Path) -> Result<ScoreMatrix> {
    parse_scores_str(&read_to_string(path)?, &path.display().to_string())
}

fn header(labels: &LabelSet) -> String {
    let mut s = String::from(ID_COLUMN);
    for name in labels.names() {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    s
}

pub fn write_labels(truth: &GroundTruthMatrix) -> String {
    let mut out = header(truth.labels());
    for (id, row) in truth.image_ids().iter().zip(truth.truth().rows()) {
        out.push_str(id);
        for &t in row {
            out.push_str(if t { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}

pub fn write_scores(scores: &ScoreMatrix) -> String {
    let mut out = header(scores.labels());
    for (id, row) in scores.image_ids().iter().zip(scores.scores().rows()) {
        out.push_str(id);
        for v in row {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

fn keyed_rows<'a>(
    rows: &'a [(u64, StringRecord)],
    source: &str,
    expected_header: &[&str],
) -> Result<&'a [(u64, StringRecord)]> {
    let Some((line, h)) = rows.first() else {
        return Err(parse_err(source, 1, 1, "missing header row"));
    };
    if h.iter().collect::<Vec<_>>() != expected_header {
        return Err(parse_err(
            source,
            *line,
            1,
            format!("header must be `{}`", expected_header.join(",")),
        ));
    }
    for (line, rec) in &rows[1..] {
        if rec.len() != expected_header.len() {
            return Err(parse_err(
                source,
                *line,
                rec.len().min(expected_header.len()) + 1,
                format!("expected {} cells, found {}", expected_header.len(), rec.len()),
            ));
        }
    }
    Ok(&rows[1..])
}

fn cell<T: FromStr>(source: &str, line: u64, column: usize, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse()
        .map_err(|e: T::Err| parse_err(source, line, column, format!("`{raw}`: {e}")))
}

/// `label,threshold` rows, in label order.
pub fn parse_thresholds_str(text: &str, source: &str) -> Result<(LabelSet, ThresholdVector)> {
    let rows = records(text, source)?;
    let body = keyed_rows(&rows, source, &["label", "threshold"])?;
    let mut names = Vec::new();
    let mut values = Vec::new();
    for (line, rec) in body {
        names.push(rec[0].to_string());
        let t: f64 = cell(source, *line, 2, &rec[1])?;
        if !(t > 0.0 && t < 1.0) {
            return Err(parse_err(source, *line, 2, format!("threshold {t} not inside (0, 1)")));
        }
        values.push(t);
    }
    let labels = LabelSet::new(names).map_err(|e| parse_err(source, 2, 1, e.to_string()))?;
    Ok((labels, ThresholdVector::new(values)?))
}

pub fn parse_thresholds(path: &Path) -> Result<(LabelSet, ThresholdVector)> {
    parse_thresholds_str(&read_to_string(path)?, &path.display().to_string())
}

pub fn write_thresholds(labels: &LabelSet, thresholds: &ThresholdVector) -> String {
    let mut out = String::from("label,threshold\n");
    for (name, t) in labels.names().iter().zip(thresholds.as_slice()) {
        out.push_str(&format!("{name},{t}\n"));
    }
    out
}

/// `# seed=<n>` line, then `image_id,partition` rows.
pub fn parse_split_str(text: &str, source: &str) -> Result<SplitAssignment> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let seed: u64 = first
        .strip_prefix("# seed=")
        .ok_or_else(|| parse_err(source, 1, 1, "expected `# seed=<n>`"))
        .and_then(|s| cell(source, 1, 1, s.trim_end()))?;
    let rows: Vec<(u64, StringRecord)> = records(rest, source)?
        .into_iter()
        .map(|(line, rec)| (line + 1, rec))
        .collect();
    let body = keyed_rows(&rows, source, &[ID_COLUMN, "partition"])?;
    let mut seen = std::collections::HashSet::new();
    let mut assignments = Vec::with_capacity(body.len());
    for (line, rec) in body {
        if !seen.insert(rec[0].to_string()) {
            return Err(parse_err(source, *line, 1, format!("duplicate image id `{}`", &rec[0])));
        }
        let p: Partition = cell(source, *line, 2, &rec[1])?;
        assignments.push((rec[0].to_string(), p));
    }
    Ok(SplitAssignment { assignments, seed })
}

pub fn write_split(split: &SplitAssignment) -> String {
    let mut out = format!("# seed={}\n{ID_COLUMN},partition\n", split.seed);
    for (id, p) in &split.assignments {
        out.push_str(&format!("{id},{p}\n"));
    }
    out
}

/// Image ids from either a plain one-per-line list or a label/score file
/// (first column, header skipped).
pub fn parse_id_list(text: &str) -> Vec<String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
    if lines
        .peek()
        .is_some_and(|l| l.split(',').next() == Some(ID_COLUMN))
    {
        lines.next();
    }
    lines
        .map(|l| l.split(',').next().unwrap_or_default().to_string())
        .collect()
}

/// `label,cohort,metric,value` rows.
pub fn parse_reference_str(text: &str, source: &str) -> Result<Vec<ReferenceValue>> {
    let rows = records(text, source)?;
    let body = keyed_rows(&rows, source, &["label", "cohort", "metric", "value"])?;
    body.iter()
        .map(|(line, rec)| {
            Ok(ReferenceValue {
                label: rec[0].to_string(),
                cohort: cell(source, *line, 2, &rec[1])?,
                metric: cell(source, *line, 3, &rec[2])?,
                value: cell(source, *line, 4, &rec[3])?,
            })
        })
        .collect()
}

pub fn write_reference(values: &[ReferenceValue]) -> String {
    let mut out = String::from("label,cohort,metric,value\n");
    for v in values {
        out.push_str(&format!("{},{},{},{}\n", v.label, v.cohort, v.metric, v.value));
    }
    out
}
