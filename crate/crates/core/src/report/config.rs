use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::features::{DIFF_COLUMN, STD_COLUMN};
use crate::forest::ForestParams;
use crate::shapley::ShapMode;
use crate::synth::{self, GenConfig, REACTOR_COLUMN, RECIPE_COLUMN, YEAR_COLUMN};

/// Input and output locations. Relative paths resolve against the working
/// directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Directory holding `runs.csv`, `schema.json` and `truth.csv`.
    /// Defaults to `<out>/synth`, where `synth` writes its dataset.
    pub data_dir: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            data_dir: None,
            out: PathBuf::from("critproc-out"),
        }
    }
}

impl Paths {
    pub fn data_dir(&self) -> PathBuf {
        self.data_dir.clone().unwrap_or_else(|| self.out.join("synth"))
    }

    pub fn command_dir(&self, command: &str) -> PathBuf {
        self.out.join(command)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cut {
    K(usize),
    Height(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSection {
    pub cut: Cut,
    /// Inputs profiled per cluster.
    pub profile_inputs: Vec<String>,
}

impl Default for ClusterSection {
    fn default() -> Self {
        ClusterSection {
            cut: Cut::K(3),
            profile_inputs: default_inputs(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    /// `truth.csv`, with labels `>= k - 1` merged into `k - 1`.
    Truth,
    /// The Ward cut of the `cluster` section, recomputed.
    Cluster,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySection {
    pub labels: LabelSource,
    /// Class count for truth labels.
    pub k: usize,
    pub inputs: Vec<String>,
    pub test_ratio: f64,
    pub split_seed: u64,
    pub forest: ForestParams,
}

impl Default for ClassifySection {
    fn default() -> Self {
        ClassifySection {
            labels: LabelSource::Cluster,
            k: 3,
            inputs: default_inputs(),
            test_ratio: 0.2,
            split_seed: 0,
            forest: ForestParams::classifier(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressSection {
    /// The target is the row mean of these columns.
    pub target_columns: Vec<String>,
    pub inputs: Vec<String>,
    pub test_ratio: f64,
    pub split_seed: u64,
    pub forest: ForestParams,
}

impl Default for RegressSection {
    fn default() -> Self {
        let mut target_columns = synth::thickness_columns_at("rhalf");
        target_columns.extend(synth::thickness_columns_at("r"));
        let mut inputs = synth::thickness_columns_at("r0");
        inputs.extend(default_inputs());
        RegressSection {
            target_columns,
            inputs,
            test_ratio: 0.2,
            split_seed: 0,
            forest: ForestParams::regressor(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ExplainTarget {
    Regress,
    /// Probability of one class from the `classify` model.
    Classify {
        class: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapSection {
    pub model: ExplainTarget,
    pub mode: ShapMode,
    /// Background rows drawn from the training set.
    pub background_cap: usize,
    pub background_seed: u64,
    /// Explain at most this many test rows (all when `None`).
    pub max_instances: Option<usize>,
}

impl Default for ShapSection {
    fn default() -> Self {
        ShapSection {
            model: ExplainTarget::Regress,
            mode: ShapMode::Exact,
            background_cap: 100,
            background_seed: 0,
            max_instances: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    /// Overrides every seed below when set.
    pub seed: Option<u64>,
    pub synth: Option<GenConfig>,
    pub cluster: ClusterSection,
    pub classify: ClassifySection,
    pub regress: RegressSection,
    pub shap: ShapSection,
}

fn default_inputs() -> Vec<String> {
    [RECIPE_COLUMN, DIFF_COLUMN, YEAR_COLUMN, REACTOR_COLUMN, STD_COLUMN]
        .map(String::from)
        .to_vec()
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        serde_json::from_str(text).map_err(|e| ReportError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ReportError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Applies command-line overrides and propagates the global seed.
    pub fn resolved(mut self, seed: Option<u64>, out: Option<PathBuf>) -> Self {
        if let Some(s) = seed {
            self.seed = Some(s);
        }
        if let Some(out) = out {
            self.paths.out = out;
        }
        if let Some(s) = self.seed {
            if let Some(g) = self.synth.as_mut() {
                g.seed = s;
            }
            self.classify.split_seed = s;
            self.classify.forest.seed = s;
            self.regress.split_seed = s;
            self.regress.forest.seed = s;
            self.shap.background_seed = s;
            if let ShapMode::Sampled { seed, .. } = &mut self.shap.mode {
                *seed = s;
            }
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
