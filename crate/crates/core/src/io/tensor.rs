//! Binary tensor dumps.
//!
//! A dump is one UTF-8 header line of compact JSON, terminated by `\n`:
//!
//! ```text
//! {"dtype":"f32","shape":[C,H,W],"layout":"row-major","byte_order":"little"}
//! ```
//!
//! followed by exactly `4 * product(shape)` bytes of little-endian IEEE-754
//! `f32`. Optional header keys, written after the required ones in this
//! order: `image_id` (string), `image_size` (`[height, width]`), `labels`
//! (list of label names, for `[K, C]` head weights). Keys appear in that
//! order without whitespace, so writing a parsed dump reproduces its bytes.

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lam::{FeatureMapDump, HeadWeights};
use crate::model::LabelSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    dtype: String,
    shape: Vec<usize>,
    layout: String,
    byte_order: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image_size: Option<[u32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorDump {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
    pub image_id: Option<String>,
    pub image_size: Option<(u32, u32)>,
    pub labels: Option<Vec<String>>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::TensorFormat(msg.into())
}

impl TensorDump {
    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.data.len() != self.element_count() {
            return Err(bad(format!(
                "shape {:?} needs {} values, have {}",
                self.shape,
                self.element_count(),
                self.data.len()
            )));
        }
        let header = Header {
            dtype: "f32".into(),
            shape: self.shape.clone(),
            layout: "row-major".into(),
            byte_order: "little".into(),
            image_id: self.image_id.clone(),
            image_size: self.image_size.map(|(h, w)| [h, w]),
            labels: self.labels.clone(),
        };
        let mut out = serde_json::to_vec(&header)?;
        out.push(b'\n');
        out.reserve(self.data.len() * 4);
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("missing header line"))?;
        let header_text =
            std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not UTF-8"))?;
        let header: Header =
            serde_json::from_str(header_text).map_err(|e| bad(format!("header: {e}")))?;
        if header.dtype != "f32" {
            return Err(bad(format!("unsupported dtype `{}`", header.dtype)));
        }
        if header.layout != "row-major" {
            return Err(bad(format!("unsupported layout `{}`", header.layout)));
        }
        if header.byte_order != "little" {
            return Err(bad(format!("unsupported byte order `{}`", header.byte_order)));
        }
        let count = header
            .shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| bad("shape overflows"))?;
        let body = &bytes[nl + 1..];
        if body.len() != count * 4 {
            return Err(bad(format!(
                "shape {:?} needs {} bytes of data, found {}",
                header.shape,
                count * 4,
                body.len()
            )));
        }
        let data = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Ok(Self {
            shape: header.shape,
            data,
            image_id: header.image_id,
            image_size: header.image_size.map(|[h, w]| (h, w)),
            labels: header.labels,
        })
    }
}

impl TryFrom<TensorDump> for FeatureMapDump {
    type Error = Error;

    fn try_from(dump: TensorDump) -> Result<Self> {
        let [c, h, w] = dump.shape[..] else {
            return Err(bad(format!("feature map shape {:?} is not [C,H,W]", dump.shape)));
        };
        let data = Array3::from_shape_vec((c, h, w), dump.data)
            .map_err(|e| bad(e.to_string()))?;
        let mut features = FeatureMapDump::new(data)?;
        features.source_image_id = dump.image_id;
        features.source_image_size = dump.image_size;
        Ok(features)
    }
}

impl From<&FeatureMapDump> for TensorDump {
    fn from(f: &FeatureMapDump) -> Self {
        let (c, h, w) = f.data.dim();
        TensorDump {
            shape: vec![c, h, w],
            data: f.data.iter().copied().collect(),
            image_id: f.source_image_id.clone(),
            image_size: f.source_image_size,
            labels: None,
        }
    }
}

impl TryFrom<TensorDump> for HeadWeights {
    type Error = Error;

    fn try_from(dump: TensorDump) -> Result<Self> {
        let [k, c] = dump.shape[..] else {
            return Err(bad(format!("head weight shape {:?} is not [K,C]", dump.shape)));
        };
        let labels = match dump.labels {
            Some(names) => LabelSet::new(names)?,
            None if k == LabelSet::default().len() => LabelSet::default(),
            None => LabelSet::new((0..k).map(|i| format!("label{i}")))?,
        };
        let weights = Array2::from_shape_vec((k, c), dump.data).map_err(|e| bad(e.to_string()))?;
        HeadWeights::new(weights, labels)
    }
}

impl From<&HeadWeights> for TensorDump {
    fn from(h: &HeadWeights) -> Self {
        TensorDump {
            shape: vec![h.weights.nrows(), h.weights.ncols()],
            data: h.weights.iter().copied().collect(),
            image_id: None,
            image_size: None,
            labels: Some(h.labels.names().to_vec()),
        }
    }
}
