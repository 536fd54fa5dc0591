//! Pipeline commands and their report artifacts.
//!
//! Each command reads a [`PipelineConfig`], writes `report.json` plus its
//! figures into `<out>/<command>/`, and returns the report. Reports embed
//! the resolved config and the crate version and contain no timestamps, so
//! identical configs give byte-identical files.

mod commands;
mod config;
pub mod svg;

use std::path::{Path, PathBuf};

pub use commands::{cmd_classify, cmd_cluster, cmd_explain, cmd_regress, cmd_synth, run, Command, ModelArtifact};
pub use config::{
    ClassifySection, ClusterSection, Cut, ExplainTarget, LabelSource, Paths, PipelineConfig, RegressSection,
    ShapSection,
};

use crate::data::DataError;
use crate::features::FeatureError;
use crate::forest::ForestError;
use crate::hcluster::ClusterError;
use crate::metrics::MetricsError;
use crate::pca::PcaError;
use crate::shapley::ShapError;
use crate::synth::SynthError;

pub const REPORT_FILE: &str = "report.json";
pub const MODEL_FILE: &str = "model.json";
pub const DENDROGRAM_SVG: &str = "dendrogram.svg";
pub const PCA_SVG: &str = "pca_panels.svg";
pub const CONFUSION_TRAIN_SVG: &str = "confusion_train.svg";
pub const CONFUSION_TEST_SVG: &str = "confusion_test.svg";
pub const PRED_VS_ACTUAL_SVG: &str = "pred_vs_actual.svg";
pub const SHAP_BAR_SVG: &str = "shap_bar.svg";

/// Command failure, split by who has to fix it.
#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    /// The configuration is malformed or inconsistent with the data schema.
    #[error("config error: {0}")]
    Config(String),
    /// Input files are missing, unreadable or unusable.
    #[error("data error: {0}")]
    Data(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl ReportError {
    /// Process exit code: 2 for configuration problems, 3 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Config(_) | ReportError::Output { .. } => 2,
            ReportError::Data(_) => 3,
        }
    }
}

impl From<DataError> for ReportError {
    fn from(e: DataError) -> Self {
        ReportError::Data(e.to_string())
    }
}

impl From<FeatureError> for ReportError {
    fn from(e: FeatureError) -> Self {
        ReportError::Data(e.to_string())
    }
}

impl From<ForestError> for ReportError {
    fn from(e: ForestError) -> Self {
        match e {
            ForestError::InvalidParams(_) => ReportError::Config(e.to_string()),
            _ => ReportError::Data(e.to_string()),
        }
    }
}

impl From<ClusterError> for ReportError {
    fn from(e: ClusterError) -> Self {
        match e {
            ClusterError::KOutOfRange { .. } => ReportError::Config(e.to_string()),
            _ => ReportError::Data(e.to_string()),
        }
    }
}

impl From<MetricsError> for ReportError {
    fn from(e: MetricsError) -> Self {
        ReportError::Data(e.to_string())
    }
}

impl From<PcaError> for ReportError {
    fn from(e: PcaError) -> Self {
        ReportError::Data(e.to_string())
    }
}

impl From<ShapError> for ReportError {
    fn from(e: ShapError) -> Self {
        match e {
            ShapError::TooManyFeatures { .. } | ShapError::NoPermutations => ReportError::Config(e.to_string()),
            _ => ReportError::Data(e.to_string()),
        }
    }
}

impl From<SynthError> for ReportError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidConfig(_) => ReportError::Config(e.to_string()),
            SynthError::Data(_) => ReportError::Data(e.to_string()),
            SynthError::Io { path, source } => ReportError::Output { path, source },
        }
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    let fail = |source| ReportError::Output {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(fail)?;
    }
    std::fs::write(path, contents).map_err(fail)
}
