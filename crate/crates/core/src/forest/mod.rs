//! CART decision trees and bagged random forests.
//!
//! Each tree draws from its own ChaCha stream selected by `(seed, tree index)`,
//! so a forest is bit-identical regardless of how trees are scheduled across
//! threads.

mod ensemble;
mod tree;

pub use ensemble::{fit_forest, Forest, FOREST_FORMAT_VERSION};
pub use tree::{fit_tree, LeafValue, Node, Tree};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForestError {
    #[error("no training rows")]
    EmptyData,
    #[error("expected {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("{expected} targets expected, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("label {label} outside 0..{n_classes}")]
    LabelOutOfRange { label: usize, n_classes: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("training input contains a non-finite value")]
    NonFiniteInput,
    #[error("operation needs a {0} forest")]
    WrongTask(&'static str),
    #[error("unsupported forest format version {0}")]
    UnsupportedVersion(u32),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classify,
    Regress,
}

/// How many features each node samples before searching for a split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeaturesPerSplit {
    Sqrt,
    Third,
    All,
    Count(usize),
}

impl FeaturesPerSplit {
    pub fn resolve(self, p: usize) -> usize {
        let k = match self {
            FeaturesPerSplit::Sqrt => (p as f64).sqrt().floor() as usize,
            FeaturesPerSplit::Third => p / 3,
            FeaturesPerSplit::All => p,
            FeaturesPerSplit::Count(k) => k,
        };
        k.clamp(1, p.max(1))
    }
}

/// Missing fields in JSON take their [`ForestParams::classifier`] values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub tree_count: usize,
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// `None` means `sqrt` for classification and `third` for regression.
    pub features_per_split: Option<FeaturesPerSplit>,
    pub bootstrap: bool,
    pub seed: u64,
    pub task: Task,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self::classifier()
    }
}

impl ForestParams {
    /// 1000 trees of depth at most 6.
    pub fn classifier() -> Self {
        ForestParams {
            tree_count: 1000,
            max_depth: Some(6),
            min_samples_leaf: 1,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
            task: Task::Classify,
        }
    }

    pub fn regressor() -> Self {
        ForestParams {
            task: Task::Regress,
            ..Self::classifier()
        }
    }

    /// One deterministic tree over all features, no bootstrap.
    pub fn single_tree(task: Task, max_depth: Option<usize>) -> Self {
        ForestParams {
            tree_count: 1,
            max_depth,
            min_samples_leaf: 1,
            features_per_split: Some(FeaturesPerSplit::All),
            bootstrap: false,
            seed: 0,
            task,
        }
    }

    pub fn effective_features_per_split(&self) -> FeaturesPerSplit {
        self.features_per_split.unwrap_or(match self.task {
            Task::Classify => FeaturesPerSplit::Sqrt,
            Task::Regress => FeaturesPerSplit::Third,
        })
    }

    pub fn validate(&self) -> Result<(), ForestError> {
        if self.tree_count == 0 {
            return Err(ForestError::InvalidParams("tree_count must be >= 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(ForestParams::bad("max_depth must be >= 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(ForestParams::bad("min_samples_leaf must be >= 1"));
        }
        if self.features_per_split == Some(FeaturesPerSplit::Count(0)) {
            return Err(ForestParams::bad("features_per_split count must be >= 1"));
        }
        Ok(())
    }

    fn bad(msg: &str) -> ForestError {
        ForestError::InvalidParams(msg.to_string())
    }
}

/// Training targets.
#[derive(Clone, Copy, Debug)]
pub enum Targets<'a, F> {
    Classes { labels: &'a [usize], n_classes: usize },
    Values(&'a [F]),
}

impl<'a, F> Targets<'a, F> {
    /// Class targets with `n_classes = max label + 1`.
    pub fn classes(labels: &'a [usize]) -> Self {
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        Targets::Classes { labels, n_classes }
    }

    pub fn len(&self) -> usize {
        match self {
            Targets::Classes { labels, .. } => labels.len(),
            Targets::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn task(&self) -> Task {
        match self {
            Targets::Classes { .. } => Task::Classify,
            Targets::Values(_) => Task::Regress,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_rules() {
        assert_eq!(FeaturesPerSplit::Sqrt.resolve(10), 3);
        assert_eq!(FeaturesPerSplit::Third.resolve(2), 1);
        assert_eq!(FeaturesPerSplit::Third.resolve(10), 3);
        assert_eq!(FeaturesPerSplit::Count(50).resolve(10), 10);
        assert_eq!(
            ForestParams::regressor().effective_features_per_split(),
            FeaturesPerSplit::Third
        );
    }

    #[test]
    fn params_validation() {
        let mut p = ForestParams::classifier();
        assert!(p.validate().is_ok());
        p.max_depth = Some(0);
        assert!(p.validate().is_err());
        p.max_depth = None;
        p.tree_count = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn params_json() {
        let text = r#"{"tree_count":10,"max_depth":null,"min_samples_leaf":2,
            "features_per_split":{"count":3},"bootstrap":false,"seed":4,"task":"regress"}"#;
        let p: ForestParams = serde_json::from_str(text).unwrap();
        assert_eq!(p.features_per_split, Some(FeaturesPerSplit::Count(3)));
        assert_eq!(p.max_depth, None);
    }
}
