//! Independent reference implementations used by the integration and
//! acceptance tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/reference")
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact rational `(num, den)` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio(pub u128, pub u128);

impl Ratio {
    pub fn new(num: u128, den: u128) -> Self {
        let g = gcd(num, den).max(1);
        Ratio(num / g, den / g)
    }

    pub fn add(self, o: Ratio) -> Ratio {
        Ratio::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

/// Ranked-step average precision: the mean, over positives, of the
/// precision among all items scoring at least as high as that positive.
pub fn ap_oracle(scores: &[f64], truth: &[bool]) -> Option<Ratio> {
    let p = truth.iter().filter(|t| **t).count() as u128;
    if p == 0 {
        return None;
    }
    let mut sum = Ratio(0, 1);
    for (i, _) in truth.iter().enumerate().filter(|(_, t)| **t) {
        let above: Vec<usize> = (0..scores.len()).filter(|&j| scores[j] >= scores[i]).collect();
        let hits = above.iter().filter(|&&j| truth[j]).count() as u128;
        sum = sum.add(Ratio::new(hits, above.len() as u128));
    }
    Some(Ratio::new(sum.0, sum.1 * p))
}

/// Mann-Whitney: fraction of (positive, negative) pairs ranked correctly,
/// ties counted one half.
pub fn auroc_oracle(scores: &[f64], truth: &[bool]) -> Option<f64> {
    let (mut doubled, mut pairs) = (0u128, 0u128);
    for i in (0..scores.len()).filter(|&i| truth[i]) {
        for j in (0..scores.len()).filter(|&j| !truth[j]) {
            pairs += 1;
            doubled += if scores[i] > scores[j] {
                2
            } else if scores[i] == scores[j] {
                1
            } else {
                0
            };
        }
    }
    (pairs > 0).then(|| doubled as f64 / (2 * pairs) as f64)
}

/// Sensitivity + specificity at `threshold`, counted directly.
pub fn youden_oracle(scores: &[f64], truth: &[bool], threshold: f64) -> f64 {
    let p = truth.iter().filter(|t| **t).count() as f64;
    let n = truth.len() as f64 - p;
    let tp = scores.iter().zip(truth).filter(|(s, t)| **t && **s >= threshold).count() as f64;
    let tn = scores.iter().zip(truth).filter(|(s, t)| !**t && **s < threshold).count() as f64;
    tp / p + tn / n
}

/// `raw[y][x] = sum_c w[c] * f[c][y][x]`, channels in ascending order.
pub fn lam_oracle(features: &[Vec<Vec<f32>>], weights: &[f32]) -> Vec<Vec<f64>> {
    let h = features[0].len();
    let w = features[0][0].len();
    let mut out = vec![vec![0.0f64; w]; h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f64;
            for c in 0..features.len() {
                acc += weights[c] as f64 * features[c][y][x] as f64;
            }
            out[y][x] = acc;
        }
    }
    out
}

pub fn minmax_oracle(raw: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let flat: Vec<f64> = raw.iter().flatten().copied().collect();
    let lo = flat.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = flat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    raw.iter()
        .map(|row| {
            row.iter()
                .map(|&v| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 })
                .collect()
        })
        .collect()
}

/// Logit-scale interval with a hard-coded 97.5% normal quantile.
pub fn logit_oracle(s: u64, n: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054;
    let p = s as f64 / n as f64;
    let l = (p / (1.0 - p)).ln();
    let se = 1.0 / (n as f64 * p * (1.0 - p)).sqrt();
    let back = |x: f64| x.exp() / (1.0 + x.exp());
    (back(l - Z * se), back(l + Z * se))
}

pub fn mleval_bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_mleval"))
}

pub fn run_mleval(args: &[&str]) -> std::process::Output {
    std::process::Command::new(mleval_bin())
        .args(args)
        .output()
        .expect("spawn mleval")
}

fn ok(args: &[&str]) {
    let out = run_mleval(args);
    assert!(
        out.status.success(),
        "mleval {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Runs every output-producing subcommand on the reference fixtures,
/// writing into `out`. Returns the produced files, sorted.
pub fn run_pipeline(out: &Path) -> Vec<PathBuf> {
    let fx = fixture_dir();
    let f = |name: &str| fx.join(name).to_str().unwrap().to_string();
    let o = |name: &str| out.join(name).to_str().unwrap().to_string();
    std::fs::create_dir_all(out).unwrap();

    ok(&["split", "--ids", &f("dataset_labels.csv"), "--counts", "629,70,78", "--seed", "7", "--out", &o("split.csv")]);
    ok(&[
        "thresholds", "--scores", &f("validation_scores.csv"), "--labels", &f("validation_labels.csv"),
        "--out", &o("thresholds.csv"), "--plot", &o("thresholds.svg"),
        "--test-scores", &f("test_scores.csv"), "--test-labels", &f("test_labels.csv"),
    ]);
    for (scores, dir) in [("test_scores.csv", "eval"), ("single_label_scores.csv", "eval_single")] {
        ok(&[
            "eval", "--scores", &f(scores), "--labels", &f("test_labels.csv"),
            "--thresholds", &o("thresholds.csv"), "--out-dir", &o(dir),
            "--reference", &f("published_reference.csv"), "--timestamp", "2020-01-01T00:00:00Z",
            "--format", "text,csv",
        ]);
    }
    ok(&["compare", "--a", &o("eval/report.json"), "--b", &o("eval_single/report.json"), "--out", &o("compare.csv")]);
    ok(&["curves", "--scores", &f("test_scores.csv"), "--labels", &f("test_labels.csv"), "--out-dir", &o("curves")]);
    ok(&[
        "lam", "--features", &f("lam_features.bin"), "--weights", &f("lam_weights.bin"),
        "--label", "UAC", "--base", &f("lam_base.png"), "--out", &o("lam.png"),
    ]);
    ok(&["synth", "--n", "200", "--seed", "3", "--prevalence", "0.3", "--separability", "0.8", "--out-dir", &o("synth")]);

    let mut files = Vec::new();
    let mut stack = vec![out.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.push(p.strip_prefix(out).unwrap().to_path_buf());
            }
        }
    }
    files.sort();
    files
}
