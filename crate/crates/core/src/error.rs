use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid label set: {0}")]
    InvalidLabelSet(String),

    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("duplicate image id `{0}`")]
    DuplicateId(String),

    #[error("image id `{0}` missing from paired matrix")]
    MissingId(String),

    #[error("split counts sum to {requested} but {available} ids were given")]
    SplitCounts { requested: usize, available: usize },

    #[error("cardinality {requested} exceeds label count {labels}")]
    CardinalityOutOfRange { requested: usize, labels: usize },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("label `{label}`: {source}")]
    Label {
        label: String,
        #[source]
        source: Box<Error>,
    },

    #[error("validation truth is a single class; sensitivity+specificity is non-discriminative")]
    DegenerateTruth,

    #[error("channel mismatch: features have {features} channels, weights have {weights}")]
    ChannelMismatch { features: usize, weights: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("incompatible reports: {0}")]
    IncompatibleReports(String),

    #[error("self-check failed: {0}")]
    SelfCheck(String),

    #[error("no defined curves to plot")]
    NoDefinedCurves,

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: u64,
        column: usize,
        message: String,
    },

    #[error("tensor dump: {0}")]
    TensorFormat(String),

    #[error("config: {0}")]
    Config(String),

    #[error("image: {0}")]
    Image(#[from] image::ImageError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable short code used in the CLI's machine-readable error line.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidLabelSet(_) => "invalid_label_set",
            Error::InvalidValue(_) => "invalid_value",
            Error::DuplicateId(_) => "duplicate_id",
            Error::MissingId(_) => "missing_id",
            Error::SplitCounts { .. } => "split_counts",
            Error::CardinalityOutOfRange { .. } => "cardinality_out_of_range",
            Error::EmptyInput(_) => "empty_input",
            Error::UndefinedMetric(_) => "undefined_metric",
            Error::Label { source, .. } => source.code(),
            Error::DegenerateTruth => "degenerate_truth",
            Error::ChannelMismatch { .. } => "channel_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::IncompatibleReports(_) => "incompatible_reports",
            Error::SelfCheck(_) => "self_check",
            Error::NoDefinedCurves => "no_defined_curves",
            Error::Parse { .. } => "parse",
            Error::TensorFormat(_) => "tensor_format",
            Error::Config(_) => "config",
            Error::Image(_) => "image",
            Error::Json(_) => "json",
            Error::Io { .. } => "io",
        }
    }
}
