//! Deterministic SVG plots of PR/ROC curves, one panel per label.
//!
//! Line styles: solid for the multi-label cohort (or the validation set),
//! dash-dot for the full test set, dotted grey for a threshold trace.

use std::fmt::Write as _;

use crate::curves::{Curve, CurveKind};
use crate::error::{Error, Result};

const PANEL: f64 = 300.0;
const MARGIN: f64 = 48.0;
const GAP: f64 = 24.0;
const COLUMNS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineStyle {
    Solid,
    DashDot,
    DottedGrey,
}

impl LineStyle {
    fn attrs(self) -> &'static str {
        match self {
            LineStyle::Solid => r##"stroke="#1f4e9c" stroke-width="1.5""##,
            LineStyle::DashDot => r##"stroke="#1f4e9c" stroke-width="1.5" stroke-dasharray="8 3 2 3""##,
            LineStyle::DottedGrey => r##"stroke="#888888" stroke-width="1.2" stroke-dasharray="1.5 3""##,
        }
    }
}

/// Curves for one label. `trace` holds `(recall, threshold)` pairs.
#[derive(Debug, Clone, Default)]
pub struct LabelCurves {
    pub label: String,
    pub solid: Option<Curve>,
    pub dash_dot: Option<Curve>,
    pub trace: Option<Vec<(f64, f64)>>,
}

fn defined(c: &Option<Curve>) -> Option<&Curve> {
    c.as_ref().filter(|c| c.is_defined())
}

fn area_name(kind: CurveKind) -> &'static str {
    match kind {
        CurveKind::PrecisionRecall => "AP",
        CurveKind::Roc => "AUROC",
    }
}

fn axis_names(kind: CurveKind) -> (&'static str, &'static str) {
    match kind {
        CurveKind::PrecisionRecall => ("Recall", "Precision"),
        CurveKind::Roc => ("False positive rate", "True positive rate"),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// ROC curves are drawn as straight segments between points. PR curves are
/// drawn as the step function whose area is the average precision: each
/// recall increment is covered at the precision reached at its end.
fn path_points(curve: &Curve) -> Vec<(f64, f64)> {
    let pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.x, p.y)).collect();
    if curve.kind == CurveKind::Roc {
        return pts;
    }
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pts.len() * 2);
    for &(x, y) in &pts {
        if let Some(&(px, _)) = out.last() {
            if x != px {
                out.push((px, y));
            }
        }
        out.push((x, y));
    }
    out
}

fn polyline(out: &mut String, x0: f64, y0: f64, pts: &[(f64, f64)], style: LineStyle) {
    if pts.is_empty() {
        return;
    }
    let coords: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", x0 + x * PANEL, y0 + (1.0 - y) * PANEL))
        .collect();
    writeln!(
        out,
        r#"<polyline fill="none" {} points="{}"/>"#,
        style.attrs(),
        coords.join(" ")
    )
    .unwrap();
}

fn panel(out: &mut String, kind: CurveKind, lc: &LabelCurves, names: (&str, &str), x0: f64, y0: f64) {
    let (xname, yname) = axis_names(kind);
    writeln!(
        out,
        r##"<rect x="{x0:.2}" y="{y0:.2}" width="{PANEL:.2}" height="{PANEL:.2}" fill="none" stroke="#000000"/>"##
    )
    .unwrap();
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let (tx, ty) = (x0 + t * PANEL, y0 + (1.0 - t) * PANEL);
        writeln!(
            out,
            r##"<line x1="{tx:.2}" y1="{:.2}" x2="{tx:.2}" y2="{:.2}" stroke="#000000"/><text x="{tx:.2}" y="{:.2}" font-size="10" text-anchor="middle">{t:.1}</text>"##,
            y0 + PANEL,
            y0 + PANEL + 4.0,
            y0 + PANEL + 15.0
        )
        .unwrap();
        writeln!(
            out,
            r##"<line x1="{:.2}" y1="{ty:.2}" x2="{x0:.2}" y2="{ty:.2}" stroke="#000000"/><text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{t:.1}</text>"##,
            x0 - 4.0,
            x0 - 6.0,
            ty + 3.5
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
        x0 + PANEL / 2.0,
        y0 - 8.0,
        escape(&lc.label)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{xname}</text>"#,
        x0 + PANEL / 2.0,
        y0 + PANEL + 30.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{yname}</text>"#,
        x0 - 32.0,
        y0 + PANEL / 2.0,
        x0 - 32.0,
        y0 + PANEL / 2.0
    )
    .unwrap();

    let mut notes = Vec::new();
    if let Some(trace) = &lc.trace {
        polyline(out, x0, y0, trace, LineStyle::DottedGrey);
    }
    for (curve, style, name) in [
        (defined(&lc.dash_dot), LineStyle::DashDot, names.1),
        (defined(&lc.solid), LineStyle::Solid, names.0),
    ] {
        if let Some(c) = curve {
            polyline(out, x0, y0, &path_points(c), style);
            let area = c.area.value.expect("defined curve has an area");
            notes.push(format!("{name} {} {area:.3}", area_name(kind)));
        }
    }
    let (nx, base_y) = match kind {
        CurveKind::PrecisionRecall => (x0 + 8.0, y0 + PANEL - 10.0 - 14.0 * (notes.len() as f64 - 1.0)),
        CurveKind::Roc => (x0 + PANEL / 2.0, y0 + PANEL - 10.0 - 14.0 * (notes.len() as f64 - 1.0)),
    };
    for (i, n) in notes.iter().enumerate() {
        writeln!(
            out,
            r#"<text x="{nx:.2}" y="{:.2}" font-size="11">{}</text>"#,
            base_y + 14.0 * i as f64,
            escape(n)
        )
        .unwrap();
    }
}

/// Renders one panel per label that has at least one defined curve.
/// `solid_name` and `dash_dot_name` label the two line styles in the legend
/// and the area annotations.
pub fn render_curves(
    kind: CurveKind,
    labels: &[LabelCurves],
    solid_name: &str,
    dash_dot_name: &str,
) -> Result<String> {
    let drawable: Vec<&LabelCurves> = labels
        .iter()
        .filter(|l| defined(&l.solid).is_some() || defined(&l.dash_dot).is_some())
        .collect();
    if drawable.is_empty() {
        return Err(Error::NoDefinedCurves);
    }
    let cols = drawable.len().min(COLUMNS);
    let rows = drawable.len().div_ceil(COLUMNS);
    let cell_w = PANEL + MARGIN + GAP;
    let cell_h = PANEL + MARGIN + GAP;
    let width = cols as f64 * cell_w + GAP;
    let height = rows as f64 * cell_h + GAP + 20.0;

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    )
    .unwrap();
    writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##).unwrap();
    for (i, lc) in drawable.iter().enumerate() {
        let x0 = (i % COLUMNS) as f64 * cell_w + MARGIN;
        let y0 = (i / COLUMNS) as f64 * cell_h + GAP + 20.0;
        panel(&mut out, kind, lc, (solid_name, dash_dot_name), x0, y0);
    }

    let ly = height - 10.0;
    let mut lx = MARGIN;
    let any_trace = drawable.iter().any(|l| l.trace.is_some());
    let mut legend = vec![
        (LineStyle::Solid, solid_name.to_string()),
        (LineStyle::DashDot, dash_dot_name.to_string()),
    ];
    if any_trace {
        legend.push((LineStyle::DottedGrey, "threshold vs recall".to_string()));
    }
    for (style, name) in legend {
        writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" {}/><text x="{:.2}" y="{ly:.2}" font-size="11">{}</text>"#,
            ly - 4.0,
            lx + 30.0,
            ly - 4.0,
            style.attrs(),
            lx + 36.0,
            escape(&name)
        )
        .unwrap();
        lx += 60.0 + 7.0 * name.chars().count() as f64;
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{pr_curve, roc_curve, threshold_trace};

    fn curves(kind: CurveKind, label: &str, defined: bool) -> LabelCurves {
        let truth = if defined { [true, false, true, false] } else { [false; 4] };
        let scores = [0.9, 0.8, 0.4, 0.3];
        let build = |s: &[f64], t: &[bool]| match kind {
            CurveKind::PrecisionRecall => pr_curve(s, t).unwrap(),
            CurveKind::Roc => roc_curve(s, t).unwrap(),
        };
        LabelCurves {
            label: label.into(),
            solid: Some(build(&scores[..], &truth[..])),
            dash_dot: Some(build(&scores[..], &truth[..])),
            trace: None,
        }
    }

    #[test]
    fn one_panel_per_defined_label() {
        let labels: Vec<LabelCurves> = ["NGT", "ETT", "UAC", "UVC"]
            .iter()
            .map(|l| curves(CurveKind::PrecisionRecall, l, true))
            .collect();
        let svg = render_curves(CurveKind::PrecisionRecall, &labels, "subset", "all").unwrap();
        assert_eq!(svg.matches(r##"fill="none" stroke="#000000""##).count(), 4);
        assert_eq!(svg.matches("all AP ").count(), 4);
        assert_eq!(svg, render_curves(CurveKind::PrecisionRecall, &labels, "subset", "all").unwrap());
    }

    #[test]
    fn undefined_labels_are_skipped() {
        let labels = vec![
            curves(CurveKind::Roc, "a", true),
            curves(CurveKind::Roc, "b", false),
        ];
        let svg = render_curves(CurveKind::Roc, &labels, "subset", "all").unwrap();
        assert_eq!(svg.matches(r##"fill="none" stroke="#000000""##).count(), 1);
        assert!(svg.contains("AUROC 0.750"));
        let none = vec![curves(CurveKind::Roc, "b", false)];
        assert!(matches!(
            render_curves(CurveKind::Roc, &none, "subset", "all"),
            Err(Error::NoDefinedCurves)
        ));
    }

    #[test]
    fn trace_is_dotted_grey() {
        let mut lc = curves(CurveKind::PrecisionRecall, "a", true);
        lc.trace = Some(threshold_trace(lc.solid.as_ref().unwrap()).unwrap());
        let svg = render_curves(CurveKind::PrecisionRecall, &[lc], "validation", "test").unwrap();
        assert!(svg.contains(r##"stroke="#888888""##));
        assert!(svg.contains("threshold vs recall"));
    }

    #[test]
    fn pr_path_is_stepped() {
        let c = pr_curve(&[0.9, 0.8, 0.7], &[true, false, true]).unwrap();
        let pts = path_points(&c);
        assert_eq!(pts.first(), Some(&(0.0, 1.0)));
        assert_eq!(pts.last(), Some(&(1.0, 2.0 / 3.0)));
    }
}
