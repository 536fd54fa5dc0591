use std::path::Path;

use critproc::hcluster::ClusterLabels;
use critproc::report::{
    cmd_classify, cmd_cluster, cmd_explain, cmd_regress, cmd_synth, ExplainTarget, PipelineConfig, ReportError,
};
use critproc::shapley::ShapMode;
use serde_json::Value;

fn config(out: &Path, json: &str) -> PipelineConfig {
    PipelineConfig::from_json(json)
        .unwrap()
        .resolved(Some(3), Some(out.to_path_buf()))
}

fn parse(text: String) -> Value {
    serde_json::from_str(&text).unwrap()
}

fn labels(report: &Value) -> ClusterLabels {
    ClusterLabels::new(
        report["labels"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap() as usize)
            .collect(),
    )
}

const SMALL: &str = r#"{"synth": {"n_runs": 120},
    "classify": {"labels": "truth", "forest": {"tree_count": 30}},
    "regress": {"forest": {"tree_count": 30}},
    "shap": {"background_cap": 15, "max_instances": 5}"#;

fn small(extra: &str) -> String {
    format!("{SMALL}{extra}}}")
}

#[test]
fn synth_requires_its_section() {
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_synth(&config(dir.path(), "{}")).unwrap_err();
    assert!(matches!(err, ReportError::Config(_)));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn cuts_are_nested_and_k1_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    cmd_synth(&config(dir.path(), &small(""))).unwrap();
    let cut = |k: usize| {
        parse(
            cmd_cluster(&config(
                dir.path(),
                &small(&format!(r#", "cluster": {{"cut": {{"k": {k}}}}}"#)),
            ))
            .unwrap(),
        )
    };
    let one = cut(1);
    assert_eq!(one["cluster_sizes"], serde_json::json!([120]));
    assert_eq!(one["profile"]["clusters"][0]["member_count"], 120);
    let two = labels(&cut(2));
    let three = labels(&cut(3));
    assert!(three.refines(&two));
    assert!(two.refines(&labels(&one)));
    let report = cut(3);
    let mus: Vec<f64> = report["profile"]["clusters"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["mu_thick"].as_f64().unwrap())
        .collect();
    assert!(mus.windows(2).all(|w| w[0] >= w[1]), "{mus:?}");
    assert!(report["ari_vs_truth"].is_number());
}

#[test]
fn height_cut_matches_equivalent_k() {
    let dir = tempfile::tempdir().unwrap();
    cmd_synth(&config(dir.path(), &small(""))).unwrap();
    let by_k = parse(cmd_cluster(&config(dir.path(), &small(""))).unwrap());
    let merges = by_k["merges"].as_array().unwrap();
    let n = merges.len();
    // Between the heights of the last three merges lies a 3-cluster cut.
    let h = 0.5 * (merges[n - 3]["height"].as_f64().unwrap() + merges[n - 2]["height"].as_f64().unwrap());
    let by_h = parse(
        cmd_cluster(&config(
            dir.path(),
            &small(&format!(r#", "cluster": {{"cut": {{"height": {h}}}}}"#)),
        ))
        .unwrap(),
    );
    assert_eq!(by_h["labels"], by_k["labels"]);
}

#[test]
fn bad_inputs_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    cmd_synth(&config(dir.path(), &small(""))).unwrap();
    let empty = config(dir.path(), &small(r#", "cluster": {"profile_inputs": ["year"]}"#));
    assert!(cmd_cluster(&empty).is_ok());
    let mut cfg = config(dir.path(), &small(""));
    cfg.classify.inputs.clear();
    assert!(matches!(cmd_classify(&cfg), Err(ReportError::Config(_))));
    let mut cfg = config(dir.path(), &small(""));
    cfg.regress.inputs.push(cfg.regress.target_columns[0].clone());
    assert!(matches!(cmd_regress(&cfg), Err(ReportError::Config(_))));
    let mut cfg = config(dir.path(), &small(""));
    cfg.classify.forest.tree_count = 0;
    assert!(matches!(cmd_classify(&cfg), Err(ReportError::Config(_))));
}

#[test]
fn explain_needs_a_trained_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &small(""));
    cmd_synth(&cfg).unwrap();
    let err = cmd_explain(&cfg).unwrap_err();
    assert!(matches!(err, ReportError::Data(_)));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn explain_classifier_probability() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), &small(""));
    cfg.shap.model = ExplainTarget::Classify { class: 0 };
    cfg.shap.max_instances = Some(4);
    cmd_synth(&cfg).unwrap();
    cmd_classify(&cfg).unwrap();
    let report = parse(cmd_explain(&cfg).unwrap());
    assert_eq!(report["algorithm"], "exact_tree_interventional");
    assert_eq!(report["n_instances"], 4);
    assert!(report["max_efficiency_gap"].as_f64().unwrap() < 1e-9);
    let base = report["shap"]["base_value"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&base));
    let names: Vec<&str> = report["shap"]["features"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap())
        .collect();
    assert_eq!(names.len(), cfg.classify.inputs.len());

    let mut bad = cfg.clone();
    bad.shap.model = ExplainTarget::Classify { class: 7 };
    assert!(matches!(cmd_explain(&bad), Err(ReportError::Config(_))));
}

#[test]
fn sampled_explain_reports_efficiency() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), &small(""));
    cfg.shap.mode = ShapMode::Sampled {
        n_permutations: 50,
        seed: 0,
    };
    cmd_synth(&cfg).unwrap();
    cmd_regress(&cfg).unwrap();
    let report = parse(cmd_explain(&cfg).unwrap());
    assert_eq!(report["algorithm"], "permutation_sampling");
    assert!(report["max_efficiency_gap"].as_f64().unwrap() < 1e-9);
}
