//! Classification and regression scores, partition agreement, and cluster
//! profiling.

mod classification;
mod profile;
mod regression;

pub use classification::{
    adjusted_rand_index, classification_metrics, confusion, Averaging, ClassificationMetrics, ConfusionMatrix,
};
pub use profile::{moments, profile_clusters, ClusterProfile, ClusterStats, InputProfile, Moments, HISTOGRAM_BINS};
pub use regression::{regression_metrics, RegressionMetrics};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("label {label} outside 0..{k}")]
    LabelOutOfRange { label: usize, k: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no samples")]
    Empty,
    #[error("target has zero variance; R² undefined")]
    ZeroVarianceTarget,
    #[error("target value at index {0} is zero; MAPE undefined")]
    ZeroTargetValue(usize),
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("column `{0}`: {1}")]
    Column(String, String),
}
