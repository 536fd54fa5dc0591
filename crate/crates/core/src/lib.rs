//! Data-driven identification of critical process inputs for batch production.
//!
//! The workflow clusters production runs on their output measurements with
//! Ward-linkage agglomerative clustering, profiles the clusters against the
//! process inputs, trains random forests on the discovered labels, and ranks
//! inputs by mean absolute Shapley value.
//!
//! The numerical core ([`hcluster`], [`pca`], [`forest`], [`metrics`],
//! [`shapley`]) is generic over [`Scalar`] (`f32` or `f64`). Tabular data
//! ([`data`], [`synth`]) is `f64`. The aliases below name the `f64`
//! instantiations used by the pipeline.

pub mod data;
pub mod features;
pub mod forest;
pub mod hcluster;
pub mod metrics;
pub mod pca;
pub mod report;
pub mod scalar;
pub mod shapley;
pub mod synth;

pub use scalar::Scalar;

/// Crate version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Dendrogram = hcluster::Dendrogram<f64>;
pub type PcaModel = pca::PcaModel<f64>;
pub type Tree = forest::Tree<f64>;
pub type Forest = forest::Forest<f64>;
pub type ShapReport = shapley::ShapReport<f64>;
pub type RegressionMetrics = metrics::RegressionMetrics<f64>;
pub type EngineeredFeatures = features::EngineeredFeatures<f64>;

pub type Dendrogram32 = hcluster::Dendrogram<f32>;
pub type PcaModel32 = pca::PcaModel<f32>;
pub type Forest32 = forest::Forest<f32>;
