//! Label activation maps: per-label weighted sums of the final feature-map
//! channels, normalised to `[0, 1]` and overlaid on the source image.

mod colormap;
mod overlay;

pub use colormap::BLUE_TO_RED;
pub use overlay::{encode_png, render_overlay, DEFAULT_OPACITY};

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};
use crate::model::LabelSet;

/// `C x H x W` activations of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMapDump {
    pub data: Array3<f32>,
    pub source_image_id: Option<String>,
    /// `(height, width)` of the image the activations were computed from.
    pub source_image_size: Option<(u32, u32)>,
}

impl FeatureMapDump {
    pub fn new(data: Array3<f32>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature map".into()));
        }
        Ok(Self {
            data,
            source_image_id: None,
            source_image_size: None,
        })
    }

    pub fn channels(&self) -> usize {
        self.data.dim().0
    }
}

/// `K x C` weights of the classification head, one row per label.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadWeights {
    pub weights: Array2<f32>,
    pub labels: LabelSet,
}

impl HeadWeights {
    pub fn new(weights: Array2<f32>, labels: LabelSet) -> Result<Self> {
        if weights.nrows() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weight rows for {} labels",
                weights.nrows(),
                labels.len()
            )));
        }
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("head weights".into()));
        }
        Ok(Self { weights, labels })
    }

    pub fn channels(&self) -> usize {
        self.weights.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivationMap {
    pub raw: Array2<f64>,
    pub normalized: Array2<f64>,
    pub label_index: usize,
}

impl ActivationMap {
    pub fn from_raw(raw: Array2<f64>, label_index: usize) -> Self {
        let normalized = normalize(&raw);
        Self {
            raw,
            normalized,
            label_index,
        }
    }
}

/// Min-max scaling to `[0, 1]`; a constant map becomes 0.5 everywhere.
pub fn normalize(raw: &Array2<f64>) -> Array2<f64> {
    let (min, max) = raw
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if max > min {
        let span = max - min;
        raw.mapv(|v| (v - min) / span)
    } else {
        Array2::from_elem(raw.dim(), 0.5)
    }
}

pub fn compute_lam(
    features: &FeatureMapDump,
    weights: &HeadWeights,
    label: usize,
) -> Result<ActivationMap> {
    let (c, h, w) = features.data.dim();
    if weights.channels() != c {
        return Err(Error::ChannelMismatch {
            features: c,
            weights: weights.channels(),
        });
    }
    if label >= weights.labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "label index {label} out of range for {} labels",
            weights.labels.len()
        )));
    }
    if features.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("feature map".into()));
    }
    if weights.weights.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("head weights".into()));
    }
    let row = weights.weights.row(label);
    // channel-ascending accumulation per pixel
    let mut raw = Array2::<f64>::zeros((h, w));
    for (k, plane) in features.data.outer_iter().enumerate() {
        let wk = row[k] as f64;
        raw.zip_mut_with(&plane, |acc, &f| *acc += wk * f as f64);
    }
    Ok(ActivationMap::from_raw(raw, label))
}

fn resize_bilinear(src: &Array2<f64>, (out_h, out_w): (usize, usize)) -> Array2<f64> {
    let (in_h, in_w) = src.dim();
    // corner-aligned source coordinate of output index `o`
    let coord = |o: usize, n_in: usize, n_out: usize| -> (usize, usize, f64) {
        if n_in == 1 || n_out == 1 {
            return (0, 0, 0.0);
        }
        let pos = (o as f64 * (n_in - 1) as f64) / (n_out - 1) as f64;
        let i0 = (pos.floor() as usize).min(n_in - 1);
        let i1 = (i0 + 1).min(n_in - 1);
        (i0, i1, pos - i0 as f64)
    };
    let lerp = |a: f64, b: f64, t: f64| -> f64 {
        let v = a + (b - a) * t;
        v.clamp(a.min(b), a.max(b))
    };
    let xs: Vec<_> = (0..out_w).map(|x| coord(x, in_w, out_w)).collect();
    Array2::from_shape_fn((out_h, out_w), |(y, x)| {
        let (y0, y1, ty) = coord(y, in_h, out_h);
        let (x0, x1, tx) = xs[x];
        let top = lerp(src[[y0, x0]], src[[y0, x1]], tx);
        let bottom = lerp(src[[y1, x0]], src[[y1, x1]], tx);
        lerp(top, bottom, ty)
    })
}

/// Bilinear upsampling with corner alignment to `(height, width)`.
pub fn upsample(map: &ActivationMap, target: (usize, usize)) -> Result<ActivationMap> {
    let (h, w) = map.raw.dim();
    if target.0 == 0 || target.1 == 0 {
        return Err(Error::InvalidValue("upsample target has a zero dimension".into()));
    }
    if target.0 < h || target.1 < w {
        return Err(Error::InvalidValue(format!(
            "target {target:?} is smaller than the {h}x{w} map"
        )));
    }
    Ok(ActivationMap {
        raw: resize_bilinear(&map.raw, target),
        normalized: resize_bilinear(&map.normalized, target),
        label_index: map.label_index,
    })
}
