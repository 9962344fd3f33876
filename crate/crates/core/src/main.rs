use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use mleval::curves::{pr_curve, roc_curve, threshold_trace, Curve, CurveKind};
use mleval::error::{Error, Result};
use mleval::io::config::KeyValues;
use mleval::io::emit::{emit_report, parse_report_json, ReportFormat};
use mleval::io::svg::{render_curves, LabelCurves};
use mleval::io::synth::{generate_synthetic, SyntheticSpec};
use mleval::io::tensor::TensorDump;
use mleval::io::{read_bytes, read_to_string, table, write_atomic};
use mleval::lam::{compute_lam, encode_png, render_overlay, upsample, FeatureMapDump, HeadWeights, DEFAULT_OPACITY};
use mleval::model::{split_dataset, standard_cohorts, GroundTruthMatrix, ScoreMatrix};
use mleval::report::{
    annotate_discrepancies, compare_networks, evaluate, reference_discrepancies, self_check,
    EvaluateOptions,
};
use mleval::threshold::{select_all, ThresholdGrid};

#[derive(Parser)]
#[command(name = "mleval", version, about = "Evaluate multi-label classifier scores")]
struct Cli {
    /// key=value file supplying defaults for options not given on the command line
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Seeded train/validation/test split of an id list
    Split(SplitArgs),
    /// Choose per-label thresholds on validation data
    Thresholds(ThresholdArgs),
    /// Evaluate test scores at fixed thresholds
    Eval(EvalArgs),
    /// Plot PR and ROC curves for all images and the multi-label cohort
    Curves(CurvesArgs),
    /// Render a label activation map over a base image
    Lam(LamArgs),
    /// Generate a synthetic label/score pair
    Synth(SynthArgs),
    /// Recompute and verify a report.json
    SelfCheck(SelfCheckArgs),
    /// Side-by-side comparison of two report.json files
    Compare(CompareArgs),
    /// Write the reference fixture files
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct SplitArgs {
    /// id list, or a label/score file whose first column is used
    #[arg(long)]
    ids: PathBuf,
    /// training,validation,testing counts
    #[arg(long)]
    counts: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// `observed`, or a fixed step such as `0.05`
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// SVG of validation PR curves with threshold traces
    #[arg(long)]
    plot: Option<PathBuf>,
    /// test scores to overlay on the plot
    #[arg(long, requires = "test_labels")]
    test_scores: Option<PathBuf>,
    #[arg(long, requires = "test_scores")]
    test_labels: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    thresholds: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// label,cohort,metric,value rows to check the report against
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    confidence: Option<f64>,
    /// recorded verbatim in the report
    #[arg(long)]
    timestamp: Option<String>,
    /// comma-separated subset of `text,csv`
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct CurvesArgs {
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct LamArgs {
    /// [C,H,W] tensor dump
    #[arg(long)]
    features: PathBuf,
    /// [K,C] tensor dump
    #[arg(long)]
    weights: PathBuf,
    /// label name or index
    #[arg(long)]
    label: String,
    #[arg(long)]
    base: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    opacity: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// one value, or one per label
    #[arg(long)]
    prevalence: Option<String>,
    /// one value, or one per label; `inf` separates completely
    #[arg(long)]
    separability: Option<String>,
    #[arg(long)]
    labels: Option<String>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SelfCheckArgs {
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long)]
    out_dir: PathBuf,
}

/// Command-line value if given, else the config value, else `default`.
fn resolve<T: FromStr>(flag: Option<T>, kv: &KeyValues, key: &str, default: Option<T>) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    kv.get(key)?
        .or(default)
        .ok_or_else(|| Error::Config(format!("`{key}` is required (flag or config)")))
}

fn load_pair(scores: &Path, labels: &Path) -> Result<(ScoreMatrix, GroundTruthMatrix)> {
    let truth = table::parse_labels(labels)?;
    let scores = table::parse_scores(scores)?.aligned_to(&truth)?;
    Ok((scores, truth))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn curve_for(kind: CurveKind, scores: &ScoreMatrix, truth: &GroundTruthMatrix, label: usize, rows: &[usize]) -> Result<Option<Curve>> {
    if rows.is_empty() {
        return Ok(None);
    }
    let s: Vec<f64> = rows.iter().map(|&r| scores.scores()[[r, label]]).collect();
    let t: Vec<bool> = rows.iter().map(|&r| truth.truth()[[r, label]]).collect();
    let c = match kind {
        CurveKind::PrecisionRecall => pr_curve(&s, &t)?,
        CurveKind::Roc => roc_curve(&s, &t)?,
    };
    Ok(Some(c))
}

fn run_split(a: SplitArgs, kv: &KeyValues) -> Result<()> {
    let ids = table::parse_id_list(&read_to_string(&a.ids)?);
    let counts: String = resolve(a.counts, kv, "counts", None)?;
    let parts = counts
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::InvalidValue(format!("bad count `{s}`"))))
        .collect::<Result<Vec<_>>>()?;
    let [train, val, test] = parts[..] else {
        return Err(Error::InvalidValue("counts must be training,validation,testing".into()));
    };
    let seed = resolve(a.seed, kv, "seed", None)?;
    let split = split_dataset(&ids, (train, val, test), seed)?;
    write_atomic(&a.out, table::write_split(&split).as_bytes())?;
    println!("split {} ids into {train}/{val}/{test} -> {}", ids.len(), a.out.display());
    Ok(())
}

fn run_thresholds(a: ThresholdArgs, kv: &KeyValues) -> Result<()> {
    let (scores, truth) = load_pair(&a.scores, &a.labels)?;
    let grid: ThresholdGrid = resolve(a.grid, kv, "grid", Some("0.05".to_string()))?.parse()?;
    let (vector, results) = select_all(&scores, &truth, grid)?;
    write_atomic(&a.out, table::write_thresholds(truth.labels(), &vector).as_bytes())?;
    for r in &results {
        println!(
            "{} threshold={} objective={:.6}{}",
            truth.labels().name(r.label_index),
            r.chosen,
            r.objective,
            if r.degenerate { " degenerate" } else { "" }
        );
    }
    if let Some(plot) = a.plot {
        let test = match (&a.test_scores, &a.test_labels) {
            (Some(s), Some(l)) => Some(load_pair(s, l)?),
            _ => None,
        };
        let all_val: Vec<usize> = (0..truth.n_images()).collect();
        let mut panels = Vec::new();
        for k in 0..truth.labels().len() {
            let solid = curve_for(CurveKind::PrecisionRecall, &scores, &truth, k, &all_val)?;
            let trace = match &solid {
                Some(c) if c.is_defined() => Some(threshold_trace(c)?),
                _ => None,
            };
            let dash_dot = match &test {
                Some((ts, tt)) => {
                    let rows: Vec<usize> = (0..tt.n_images()).collect();
                    curve_for(CurveKind::PrecisionRecall, ts, tt, k, &rows)?
                }
                None => None,
            };
            panels.push(LabelCurves {
                label: truth.labels().name(k).to_string(),
                solid,
                dash_dot,
                trace,
            });
        }
        let svg = render_curves(CurveKind::PrecisionRecall, &panels, "validation", "test")?;
        write_atomic(&plot, svg.as_bytes())?;
    }
    Ok(())
}

fn run_eval(a: EvalArgs, kv: &KeyValues) -> Result<()> {
    let (scores, truth) = load_pair(&a.scores, &a.labels)?;
    let (threshold_labels, thresholds) = table::parse_thresholds(&a.thresholds)?;
    if &threshold_labels != truth.labels() {
        return Err(Error::DimensionMismatch(format!(
            "threshold labels {:?} differ from label file {:?}",
            threshold_labels.names(),
            truth.labels().names()
        )));
    }
    let confidence = resolve(a.confidence, kv, "confidence", Some(0.95))?;
    let mut report = evaluate(
        &scores,
        &truth,
        &thresholds,
        &standard_cohorts(&truth),
        EvaluateOptions { confidence },
    )?;
    report.metadata.timestamp = a.timestamp;
    if let Some(path) = a.reference {
        let refs = table::parse_reference_str(&read_to_string(&path)?, &path.display().to_string())?;
        let tolerance = resolve(a.tolerance, kv, "tolerance", Some(0.001))?;
        let found = reference_discrepancies(&report, &refs, tolerance);
        annotate_discrepancies(&mut report, &found);
        println!("{} of {} reference values differ by more than {tolerance}", found.len(), refs.len());
    }
    let format: String = resolve(a.format, kv, "format", Some("text,csv".to_string()))?;
    let formats = format
        .split(',')
        .map(|f| match f.trim() {
            "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::InvalidValue(format!("unknown format `{other}`"))),
        })
        .collect::<Result<Vec<_>>>()?;
    for path in emit_report(&report, &a.out_dir, &formats)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_curves(a: CurvesArgs) -> Result<()> {
    let (scores, truth) = load_pair(&a.scores, &a.labels)?;
    let all: Vec<usize> = (0..truth.n_images()).collect();
    let multi: Vec<usize> = all.iter().copied().filter(|&r| truth.cardinality(r) > 1).collect();
    create_dir(&a.out_dir)?;
    for (kind, name) in [(CurveKind::PrecisionRecall, "pr.svg"), (CurveKind::Roc, "roc.svg")] {
        let panels = (0..truth.labels().len())
            .map(|k| {
                Ok(LabelCurves {
                    label: truth.labels().name(k).to_string(),
                    solid: curve_for(kind, &scores, &truth, k, &multi)?,
                    dash_dot: curve_for(kind, &scores, &truth, k, &all)?,
                    trace: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let svg = render_curves(kind, &panels, ">1 labels", "all images")?;
        let path = a.out_dir.join(name);
        write_atomic(&path, svg.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_lam(a: LamArgs, kv: &KeyValues) -> Result<()> {
    let features = FeatureMapDump::try_from(TensorDump::from_bytes(&read_bytes(&a.features)?)?)?;
    let head = HeadWeights::try_from(TensorDump::from_bytes(&read_bytes(&a.weights)?)?)?;
    let label = match head.labels.index_of(&a.label) {
        Some(i) => i,
        None => a
            .label
            .parse::<usize>()
            .map_err(|_| Error::InvalidValue(format!("unknown label `{}`", a.label)))?,
    };
    let map = compute_lam(&features, &head, label)?;
    let base = image::load_from_memory(&read_bytes(&a.base)?)?.to_luma8();
    let up = upsample(&map, (base.height() as usize, base.width() as usize))?;
    let opacity = resolve(a.opacity, kv, "opacity", Some(DEFAULT_OPACITY))?;
    let overlay = render_overlay(&up, &base, opacity)?;
    write_atomic(&a.out, &encode_png(&overlay)?)?;
    println!("wrote {}", a.out.display());
    Ok(())
}

fn run_synth(a: SynthArgs, kv: &KeyValues) -> Result<()> {
    let mut kv = kv.clone();
    if let Some(n) = a.n {
        kv.set("n", n.to_string());
    }
    if let Some(seed) = a.seed {
        kv.set("seed", seed.to_string());
    }
    for (key, v) in [
        ("prevalence", a.prevalence),
        ("separability", a.separability),
        ("labels", a.labels),
    ] {
        if let Some(v) = v {
            kv.set(key, v);
        }
    }
    let spec = SyntheticSpec::from_config(&kv)?;
    let (truth, scores) = generate_synthetic(&spec)?;
    create_dir(&a.out_dir)?;
    let labels = a.out_dir.join("labels.csv");
    let score_path = a.out_dir.join("scores.csv");
    write_atomic(&labels, table::write_labels(&truth).as_bytes())?;
    write_atomic(&score_path, table::write_scores(&scores).as_bytes())?;
    println!("wrote {} and {}", labels.display(), score_path.display());
    Ok(())
}

fn run_self_check(a: SelfCheckArgs) -> Result<()> {
    let report = parse_report_json(&read_to_string(&a.report)?)?;
    self_check(&report)?;
    println!("ok: {} cells consistent", report.cells.len() + report.pooled.len());
    Ok(())
}

fn run_compare(a: CompareArgs) -> Result<()> {
    let ra = parse_report_json(&read_to_string(&a.a)?)?;
    let rb = parse_report_json(&read_to_string(&a.b)?)?;
    let table = compare_networks(&ra, &rb)?;
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    let mut out = String::from("label,cohort,metric,a,b,delta\n");
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.label,
            r.cohort,
            r.metric,
            opt(r.a),
            opt(r.b),
            opt(r.delta)
        ));
    }
    write_atomic(&a.out, out.as_bytes())?;
    println!("wrote {} rows to {}", table.rows.len(), a.out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let kv = match &cli.config {
        Some(path) => KeyValues::load(path)?,
        None => KeyValues::default(),
    };
    match cli.command {
        Command::Split(a) => run_split(a, &kv),
        Command::Thresholds(a) => run_thresholds(a, &kv),
        Command::Eval(a) => run_eval(a, &kv),
        Command::Curves(a) => run_curves(a),
        Command::Lam(a) => run_lam(a, &kv),
        Command::Synth(a) => run_synth(a, &kv),
        Command::SelfCheck(a) => run_self_check(a),
        Command::Compare(a) => run_compare(a),
        Command::Fixture(a) => {
            for path in mleval::fixture::write_reference_fixtures(&a.out_dir)? {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error: code={} message={message}", e.code());
            ExitCode::FAILURE
        }
    }
}
