use std::collections::HashMap;
use std::path::Path;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::config::{Cut, ExplainTarget, LabelSource, PipelineConfig};
use super::{svg, write_file, ReportError};
use super::{
    CONFUSION_TEST_SVG, CONFUSION_TRAIN_SVG, DENDROGRAM_SVG, MODEL_FILE, PCA_SVG, PRED_VS_ACTUAL_SVG, REPORT_FILE,
    SHAP_BAR_SVG,
};
use crate::data::{load_csv, split_indices, ColumnData, Encoder, RunTable, Schema};
use crate::features::{augment, DIFF_COLUMN};
use crate::forest::{fit_forest, Forest, ForestError, ForestParams, Targets, Task, FOREST_FORMAT_VERSION};
use crate::hcluster::{ward_linkage, ClusterLabels, Merge};
use crate::metrics::{
    adjusted_rand_index, classification_metrics, confusion, profile_clusters, regression_metrics, Averaging,
    ClassificationMetrics, ClusterProfile, ConfusionMatrix, RegressionMetrics,
};
use crate::pca::pca_fit;
use crate::shapley::{
    base_value, forest_shap, shap_sampled, subsample_rows, ForestOutput, ShapConfig, ShapMode, ShapReport,
    MAX_EXACT_FEATURES,
};
use crate::synth::{self, DISK_AREA_COLUMN, NOMINAL_COLUMN, RUN_ID_COLUMN};
use crate::VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Synth,
    Cluster,
    Classify,
    Regress,
    Explain,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Cluster => "cluster",
            Command::Classify => "classify",
            Command::Regress => "regress",
            Command::Explain => "explain",
        }
    }
}

/// Runs one command and returns the text of its `report.json`.
pub fn run(command: Command, cfg: &PipelineConfig) -> Result<String, ReportError> {
    match command {
        Command::Synth => cmd_synth(cfg),
        Command::Cluster => cmd_cluster(cfg),
        Command::Classify => cmd_classify(cfg),
        Command::Regress => cmd_regress(cfg),
        Command::Explain => cmd_explain(cfg),
    }
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    command: &'static str,
    version: &'static str,
    config: &'a PipelineConfig,
    #[serde(flatten)]
    body: T,
}

fn finish<T: Serialize>(cfg: &PipelineConfig, command: Command, body: T) -> Result<String, ReportError> {
    let text = serde_json::to_string_pretty(&Envelope {
        command: command.name(),
        version: VERSION,
        config: cfg,
        body,
    })
    .expect("report serializes")
        + "\n";
    write_file(&cfg.paths.command_dir(command.name()).join(REPORT_FILE), &text)?;
    Ok(text)
}

fn write_figure(cfg: &PipelineConfig, command: Command, name: &str, contents: &str) -> Result<(), ReportError> {
    write_file(&cfg.paths.command_dir(command.name()).join(name), contents)
}

#[derive(Serialize)]
struct SynthBody {
    n_runs: usize,
    cluster_sizes: Vec<usize>,
    files: Vec<String>,
}

/// Generates a synthetic dataset into the data directory.
pub fn cmd_synth(cfg: &PipelineConfig) -> Result<String, ReportError> {
    let gen = cfg
        .synth
        .as_ref()
        .ok_or_else(|| ReportError::Config("the synth command needs a `synth` section".into()))?;
    let (table, labels) = synth::generate(gen)?;
    let dir = cfg.paths.data_dir();
    synth::export(&table, &labels, &dir)?;
    let files = [synth::RUNS_FILE, synth::SCHEMA_FILE, synth::TRUTH_FILE]
        .map(|f| dir.join(f).display().to_string())
        .to_vec();
    finish(
        cfg,
        Command::Synth,
        SynthBody {
            n_runs: table.n_rows(),
            cluster_sizes: labels.sizes(),
            files,
        },
    )
}

/// Loads the run table and appends the engineered surface-area features when
/// the raw disk columns are present.
fn load_table(cfg: &PipelineConfig) -> Result<RunTable, ReportError> {
    let dir = cfg.paths.data_dir();
    let schema = Schema::load(dir.join(synth::SCHEMA_FILE))?;
    let table = load_csv(dir.join(synth::RUNS_FILE), &schema)?;
    let has = |name: &str| table.schema().index_of(name).is_some();
    if !has(DIFF_COLUMN) && has(DISK_AREA_COLUMN) && has(NOMINAL_COLUMN) {
        return Ok(augment(table, DISK_AREA_COLUMN, NOMINAL_COLUMN)?);
    }
    Ok(table)
}

fn check_columns(table: &RunTable, names: &[String], what: &str) -> Result<(), ReportError> {
    if names.is_empty() {
        return Err(ReportError::Config(format!("{what} list is empty")));
    }
    for name in names {
        if table.schema().index_of(name).is_none() {
            return Err(ReportError::Config(format!(
                "{what} column `{name}` is not in the schema"
            )));
        }
    }
    Ok(())
}

fn run_ids(table: &RunTable) -> Vec<String> {
    match table.categorical(RUN_ID_COLUMN) {
        Ok(ids) => ids.to_vec(),
        Err(_) => (1..=table.n_rows()).map(|i| format!("row{i}")).collect(),
    }
}

/// Ward clustering of the output block, cut per config and ranked so that
/// cluster 0 has the highest mean output.
fn cluster_labels(cfg: &PipelineConfig, table: &RunTable) -> Result<(crate::Dendrogram, ClusterLabels), ReportError> {
    let outputs = table.output_matrix();
    if outputs.ncols() == 0 {
        return Err(ReportError::Config("schema has no output columns".into()));
    }
    let dendrogram = ward_linkage(outputs.view())?;
    let labels = match cfg.cluster.cut {
        Cut::K(k) => dendrogram.cut_k(k)?,
        Cut::Height(h) => dendrogram.cut_height(h),
    };
    let labels = labels.ranked_by_mean_output(outputs.view())?;
    Ok((dendrogram, labels))
}

/// True labels aligned with the table's rows.
fn truth_labels(cfg: &PipelineConfig, table: &RunTable) -> Result<ClusterLabels, ReportError> {
    let (ids, labels) = synth::read_truth(&cfg.paths.data_dir().join(synth::TRUTH_FILE))?;
    let by_id: HashMap<&str, usize> = ids
        .iter()
        .map(String::as_str)
        .zip(labels.labels.iter().copied())
        .collect();
    let aligned = run_ids(table)
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .copied()
                .ok_or_else(|| ReportError::Data(format!("run `{id}` has no entry in truth.csv")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClusterLabels::new(aligned))
}

#[derive(Serialize)]
struct PcaSummary {
    explained_variance: Vec<f64>,
    explained_ratio: Vec<f64>,
}

#[derive(Serialize)]
struct ClusterBody {
    n_runs: usize,
    k: usize,
    cluster_sizes: Vec<usize>,
    merges: Vec<Merge<f64>>,
    labels: Vec<usize>,
    ari_vs_truth: Option<f64>,
    profile: ClusterProfile,
    pca: PcaSummary,
}

/// Ward clustering of the outputs with profile, dendrogram and PCA panels.
pub fn cmd_cluster(cfg: &PipelineConfig) -> Result<String, ReportError> {
    let table = load_table(cfg)?;
    let inputs = &cfg.cluster.profile_inputs;
    if !inputs.is_empty() {
        check_columns(&table, inputs, "profile input")?;
    }
    let (dendrogram, labels) = cluster_labels(cfg, &table)?;
    let profile = profile_clusters(&table, &labels, inputs)?;

    let outputs = table.output_matrix();
    let q = outputs.ncols().min(3);
    let model = pca_fit(outputs.view(), q)?;
    let scores = model.transform(outputs.view())?;
    let total_var: f64 = outputs.var_axis(Axis(0), 0.0).sum();
    let explained_ratio: Vec<f64> = model
        .explained_variance
        .iter()
        .map(|v| if total_var > 0.0 { v / total_var } else { 0.0 })
        .collect();
    let padded: Vec<[f64; 3]> = scores
        .rows()
        .into_iter()
        .map(|r| std::array::from_fn(|i| r.get(i).copied().unwrap_or(0.0)))
        .collect();
    let ratio3: [f64; 3] = std::array::from_fn(|i| explained_ratio.get(i).copied().unwrap_or(0.0));

    let ari_vs_truth = if cfg.paths.data_dir().join(synth::TRUTH_FILE).exists() {
        let truth = truth_labels(cfg, &table)?;
        Some(adjusted_rand_index(&labels.labels, &truth.labels)?)
    } else {
        None
    };

    write_figure(
        cfg,
        Command::Cluster,
        DENDROGRAM_SVG,
        &svg::dendrogram(&dendrogram, Some(&labels.labels)),
    )?;
    write_figure(
        cfg,
        Command::Cluster,
        PCA_SVG,
        &svg::pca_panels(&padded, &labels.labels, &ratio3),
    )?;
    finish(
        cfg,
        Command::Cluster,
        ClusterBody {
            n_runs: table.n_rows(),
            k: labels.k,
            cluster_sizes: labels.sizes(),
            merges: dendrogram.merges().to_vec(),
            labels: labels.labels,
            ari_vs_truth,
            profile,
            pca: PcaSummary {
                explained_variance: model.explained_variance.to_vec(),
                explained_ratio,
            },
        },
    )
}

/// A fitted forest with everything needed to rebuild its inputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub inputs: Vec<String>,
    pub encoder: Encoder,
    pub forest: Forest<f64>,
    pub target_columns: Option<Vec<String>>,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

impl ModelArtifact {
    pub fn load(path: &Path) -> Result<Self, ReportError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ReportError::Data(format!("{}: {e} (run the training command first)", path.display())))?;
        let artifact: ModelArtifact =
            serde_json::from_str(&text).map_err(|e| ReportError::Data(format!("{}: {e}", path.display())))?;
        if artifact.forest.format_version != FOREST_FORMAT_VERSION {
            return Err(ForestError::UnsupportedVersion(artifact.forest.format_version).into());
        }
        Ok(artifact)
    }
}

fn forest_params(params: &ForestParams, task: Task) -> ForestParams {
    ForestParams { task, ..params.clone() }
}

fn encode_split(
    table: &RunTable,
    inputs: &[String],
    train: &[usize],
) -> Result<(Encoder, Array2<f64>, usize), ReportError> {
    let encoder = Encoder::fit(&table.take(train)?, inputs)?;
    let encoded = encoder.transform(table)?;
    Ok((encoder, encoded.values, encoded.warnings.len()))
}

#[derive(Serialize)]
struct ClassSplitReport {
    n: usize,
    confusion: ConfusionMatrix,
    metrics: ClassificationMetrics,
}

#[derive(Serialize)]
struct ClassifyBody {
    label_source: LabelSource,
    k: usize,
    class_sizes: Vec<usize>,
    inputs: Vec<String>,
    feature_names: Vec<String>,
    unknown_categories_in_test: usize,
    train: ClassSplitReport,
    test: ClassSplitReport,
}

/// Forest classifier from inputs to cluster labels with a stratified split.
pub fn cmd_classify(cfg: &PipelineConfig) -> Result<String, ReportError> {
    let section = &cfg.classify;
    let table = load_table(cfg)?;
    check_columns(&table, &section.inputs, "classification input")?;
    let labels = match section.labels {
        LabelSource::Cluster => cluster_labels(cfg, &table)?.1,
        LabelSource::Truth => {
            if section.k == 0 {
                return Err(ReportError::Config("classify.k must be at least 1".into()));
            }
            let truth = truth_labels(cfg, &table)?;
            ClusterLabels::new(truth.labels.iter().map(|&l| l.min(section.k - 1)).collect())
        }
    };
    let k = labels.k;
    let split = split_indices(
        table.n_rows(),
        section.test_ratio,
        section.split_seed,
        Some(&labels.labels),
    )?;
    let (encoder, x, unknown) = encode_split(&table, &section.inputs, &split.train)?;
    let x_train = x.select(Axis(0), &split.train);
    let x_test = x.select(Axis(0), &split.test);
    let pick = |rows: &[usize]| rows.iter().map(|&i| labels.labels[i]).collect::<Vec<_>>();
    let (y_train, y_test) = (pick(&split.train), pick(&split.test));

    let params = forest_params(&section.forest, Task::Classify);
    params.validate()?;
    let forest = fit_forest(
        x_train.view(),
        Targets::Classes {
            labels: &y_train,
            n_classes: k,
        },
        &params,
        &encoder.feature_names(),
    )?;
    let evaluate = |x: &Array2<f64>, y: &[usize]| -> Result<ClassSplitReport, ReportError> {
        let predicted = forest.predict_classes(x.view())?;
        let cm = confusion(y, &predicted, k)?;
        let metrics = classification_metrics(&cm, Averaging::Macro)?;
        Ok(ClassSplitReport {
            n: y.len(),
            confusion: cm,
            metrics,
        })
    };
    let train = evaluate(&x_train, &y_train)?;
    let test = evaluate(&x_test, &y_test)?;

    let class_names: Vec<String> = (0..k).map(|c| format!("cluster {c}")).collect();
    write_figure(
        cfg,
        Command::Classify,
        CONFUSION_TRAIN_SVG,
        &svg::confusion(&train.confusion, &class_names, "Confusion matrix (train)"),
    )?;
    write_figure(
        cfg,
        Command::Classify,
        CONFUSION_TEST_SVG,
        &svg::confusion(&test.confusion, &class_names, "Confusion matrix (test)"),
    )?;
    let artifact = ModelArtifact {
        inputs: section.inputs.clone(),
        encoder: encoder.clone(),
        forest,
        target_columns: None,
        train_rows: split.train,
        test_rows: split.test,
    };
    write_figure(
        cfg,
        Command::Classify,
        MODEL_FILE,
        &serde_json::to_string(&artifact).expect("model serializes"),
    )?;
    finish(
        cfg,
        Command::Classify,
        ClassifyBody {
            label_source: section.labels,
            k,
            class_sizes: labels.sizes(),
            inputs: section.inputs.clone(),
            feature_names: encoder.feature_names(),
            unknown_categories_in_test: unknown,
            train,
            test,
        },
    )
}

#[derive(Serialize)]
struct RegressSplitReport {
    n: usize,
    metrics: RegressionMetrics<f64>,
}

#[derive(Serialize)]
struct RegressBody {
    target_columns: Vec<String>,
    inputs: Vec<String>,
    feature_names: Vec<String>,
    train: RegressSplitReport,
    test: RegressSplitReport,
}

fn row_means(table: &RunTable, columns: &[String]) -> Result<Vec<f64>, ReportError> {
    for c in columns {
        if !matches!(table.column(c)?.1, ColumnData::Numeric(_)) {
            return Err(ReportError::Config(format!("target column `{c}` is not numeric")));
        }
    }
    let m = table.numeric_matrix(columns)?;
    Ok(m.rows().into_iter().map(|r| r.sum() / r.len() as f64).collect())
}

/// Forest regression of the mean of the target columns.
pub fn cmd_regress(cfg: &PipelineConfig) -> Result<String, ReportError> {
    let section = &cfg.regress;
    let table = load_table(cfg)?;
    check_columns(&table, &section.inputs, "regression input")?;
    check_columns(&table, &section.target_columns, "target")?;
    if let Some(c) = section.target_columns.iter().find(|c| section.inputs.contains(c)) {
        return Err(ReportError::Config(format!("target column `{c}` is also an input")));
    }
    let y = row_means(&table, &section.target_columns)?;
    let split = split_indices(table.n_rows(), section.test_ratio, section.split_seed, None)?;
    let (encoder, x, _) = encode_split(&table, &section.inputs, &split.train)?;
    let x_train = x.select(Axis(0), &split.train);
    let x_test = x.select(Axis(0), &split.test);
    let pick = |rows: &[usize]| rows.iter().map(|&i| y[i]).collect::<Vec<_>>();
    let (y_train, y_test) = (pick(&split.train), pick(&split.test));

    let params = forest_params(&section.forest, Task::Regress);
    params.validate()?;
    let forest = fit_forest(
        x_train.view(),
        Targets::Values(&y_train),
        &params,
        &encoder.feature_names(),
    )?;
    let p_train = forest.predict_values(x_train.view())?;
    let p_test = forest.predict_values(x_test.view())?;
    let train = RegressSplitReport {
        n: y_train.len(),
        metrics: regression_metrics(&y_train, &p_train)?,
    };
    let test = RegressSplitReport {
        n: y_test.len(),
        metrics: regression_metrics(&y_test, &p_test)?,
    };

    write_figure(
        cfg,
        Command::Regress,
        PRED_VS_ACTUAL_SVG,
        &svg::pred_vs_actual((&y_train, &p_train), (&y_test, &p_test)),
    )?;
    let artifact = ModelArtifact {
        inputs: section.inputs.clone(),
        encoder: encoder.clone(),
        forest,
        target_columns: Some(section.target_columns.clone()),
        train_rows: split.train,
        test_rows: split.test,
    };
    write_figure(
        cfg,
        Command::Regress,
        MODEL_FILE,
        &serde_json::to_string(&artifact).expect("model serializes"),
    )?;
    finish(
        cfg,
        Command::Regress,
        RegressBody {
            target_columns: section.target_columns.clone(),
            inputs: section.inputs.clone(),
            feature_names: encoder.feature_names(),
            train,
            test,
        },
    )
}

#[derive(Serialize)]
struct ExplainBody {
    model: ExplainTarget,
    algorithm: &'static str,
    background_rows: usize,
    background_cap: usize,
    n_instances: usize,
    max_efficiency_gap: f64,
    shap: ShapReport<f64>,
}

/// Shapley attributions of a saved forest over its test rows, grouped by
/// source input.
pub fn cmd_explain(cfg: &PipelineConfig) -> Result<String, ReportError> {
    let section = &cfg.shap;
    let (command, output) = match section.model {
        ExplainTarget::Regress => (Command::Regress, ForestOutput::Value),
        ExplainTarget::Classify { class } => (Command::Classify, ForestOutput::Proba(class)),
    };
    let artifact = ModelArtifact::load(&cfg.paths.command_dir(command.name()).join(MODEL_FILE))?;
    let forest = &artifact.forest;
    match (output, forest.n_classes()) {
        (ForestOutput::Value, None) => {}
        (ForestOutput::Proba(c), Some(k)) if c < k => {}
        _ => {
            return Err(ReportError::Config(format!(
                "cannot explain {:?} with the saved model",
                section.model
            )))
        }
    }
    if section.background_cap == 0 {
        return Err(ReportError::Config("shap.background_cap must be at least 1".into()));
    }
    let table = load_table(cfg)?;
    let encoded = artifact.encoder.transform(&table)?;
    let x = encoded.values;
    if x.ncols() != forest.n_features() {
        return Err(ReportError::Data("encoded width does not match the saved model".into()));
    }
    let train = x.select(Axis(0), &artifact.train_rows);
    let background = subsample_rows(train.view(), section.background_cap, section.background_seed);
    let groups: Vec<Vec<usize>> = encoded
        .encoding_map
        .iter()
        .map(|b| (b.start..b.start + b.len).collect())
        .collect();
    let names: Vec<String> = encoded.encoding_map.iter().map(|b| b.source.clone()).collect();
    let mut rows = artifact.test_rows.clone();
    if let Some(cap) = section.max_instances {
        rows.truncate(cap);
    }
    if rows.is_empty() {
        return Err(ReportError::Data("no test rows to explain".into()));
    }

    let model = |r: &[f64]| match output {
        ForestOutput::Value => forest.predict_row(r).expect("width checked"),
        ForestOutput::Proba(c) => forest.proba_row(r).expect("width checked")[c],
    };
    let shap_cfg = ShapConfig {
        background: background.clone(),
        mode: section.mode,
        groups: Some(groups),
    };
    let base = base_value(&model, background.view());
    let ids = run_ids(&table);
    let mut phis = Vec::with_capacity(rows.len());
    let mut instance_ids = Vec::with_capacity(rows.len());
    let mut max_gap: f64 = 0.0;
    let algorithm = match section.mode {
        ShapMode::Exact => {
            if names.len() > MAX_EXACT_FEATURES {
                return Err(crate::shapley::ShapError::TooManyFeatures {
                    m: names.len(),
                    max: MAX_EXACT_FEATURES,
                }
                .into());
            }
            "exact_tree_interventional"
        }
        ShapMode::Sampled { .. } => "permutation_sampling",
    };
    for &r in &rows {
        let instance = x.row(r).to_vec();
        let phi = match section.mode {
            ShapMode::Exact => forest_shap(forest, output, &instance, &shap_cfg)?,
            ShapMode::Sampled { .. } => shap_sampled(&model, &instance, &shap_cfg)?.0,
        };
        max_gap = max_gap.max((base + phi.iter().sum::<f64>() - model(&instance)).abs());
        phis.push(phi);
        instance_ids.push(ids[r].clone());
    }
    let report = ShapReport::new(base, &names, &instance_ids, &phis)?;
    write_figure(cfg, Command::Explain, SHAP_BAR_SVG, &svg::shap_bar(&report.features))?;
    finish(
        cfg,
        Command::Explain,
        ExplainBody {
            model: section.model,
            algorithm,
            background_rows: background.nrows(),
            background_cap: section.background_cap,
            n_instances: rows.len(),
            max_efficiency_gap: max_gap,
            shap: report,
        },
    )
}
