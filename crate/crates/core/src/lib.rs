//! Evaluation toolkit for multi-label classifiers: threshold selection,
//! PR/ROC curves, confusion-count metrics with logit confidence intervals,
//! cardinality-stratified reports and label activation maps.

pub mod curves;
pub mod error;
pub mod fixture;
pub mod intervals;
pub mod io;
pub mod lam;
pub mod metrics;
pub mod model;
pub mod report;
pub mod threshold;

pub use error::{Error, Result};
