//! Synthetic production runs with known cluster membership.
//!
//! Each run belongs to one of a few quality clusters. Its 15 thickness
//! measurements, recipe, surface-area mismatch and production year are drawn
//! from that cluster's distributions; the reactor is drawn independently.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::data::{write_csv, ColumnData, ColumnSpec, DataError, Role, RunTable, Schema};
use crate::hcluster::ClusterLabels;

pub const RUN_ID_COLUMN: &str = "run_id";
pub const RECIPE_COLUMN: &str = "recipe";
pub const YEAR_COLUMN: &str = "year";
pub const REACTOR_COLUMN: &str = "reactor";
pub const N_DISKS_COLUMN: &str = "n_disks";
pub const DISK_AREA_COLUMN: &str = "disk_area";
pub const NOMINAL_COLUMN: &str = "nominal_area";

/// Measurement disks, top to bottom.
pub const MEASURED_DISKS: usize = 5;
/// Radial positions per measured disk: at the inlet tube, half radius, rim.
pub const POSITIONS: [&str; 3] = ["r0", "rhalf", "r"];

pub fn thickness_column(disk: usize, position: &str) -> String {
    format!("thk_d{disk}_{position}")
}

/// All 15 thickness columns, disk-major.
pub fn thickness_columns() -> Vec<String> {
    (1..=MEASURED_DISKS)
        .flat_map(|d| POSITIONS.iter().map(move |p| thickness_column(d, p)))
        .collect()
}

/// Thickness columns at one radial position, one per measured disk.
pub fn thickness_columns_at(position: &str) -> Vec<String> {
    (1..=MEASURED_DISKS).map(|d| thickness_column(d, position)).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    /// Thickness mean, µm.
    pub mu_thick: f64,
    /// Thickness standard deviation, µm.
    pub sigma_thick: f64,
    pub recipe_pool: Vec<String>,
    /// |nominal - actual| surface area mean, cm².
    pub diff_mean: f64,
    pub diff_std: f64,
    pub year_pool: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub n_runs: usize,
    pub cluster_weights: Vec<f64>,
    pub clusters: Vec<ClusterSpec>,
    /// Inclusive range of loaded disks per run.
    pub n_disks: (usize, usize),
    /// Per-disk insert area, cm².
    pub disk_area_mean: f64,
    pub disk_area_std: f64,
    /// Step of the recipe's nominal surface area, cm².
    pub nominal_increment: f64,
    pub reactors: Vec<String>,
    /// Correlation between the 15 thickness values of one run.
    pub equicorrelation: f64,
    pub seed: u64,
}

fn recipes(versions: &[&str]) -> Vec<String> {
    (1..=4)
        .flat_map(|base| versions.iter().map(move |v| format!("R{base}-{v}")))
        .collect()
}

impl Default for GenConfig {
    fn default() -> Self {
        let older = recipes(&["V20", "V19", "V18", "V17"]);
        GenConfig {
            n_runs: 603,
            cluster_weights: vec![0.40, 0.35, 0.25],
            clusters: vec![
                ClusterSpec {
                    mu_thick: 16.35,
                    sigma_thick: 1.354,
                    recipe_pool: recipes(&["V21"]),
                    diff_mean: 4892.0,
                    diff_std: 800.0,
                    year_pool: vec![2021, 2022, 2023],
                },
                ClusterSpec {
                    mu_thick: 15.53,
                    sigma_thick: 1.386,
                    recipe_pool: older.clone(),
                    diff_mean: 4628.0,
                    diff_std: 800.0,
                    year_pool: vec![2019, 2020, 2021, 2022],
                },
                ClusterSpec {
                    mu_thick: 14.32,
                    sigma_thick: 1.588,
                    recipe_pool: older,
                    diff_mean: 5526.0,
                    diff_std: 800.0,
                    year_pool: vec![2017, 2018, 2019, 2020, 2021],
                },
            ],
            n_disks: (40, 50),
            disk_area_mean: 1800.0,
            disk_area_std: 300.0,
            nominal_increment: 10_000.0,
            reactors: (1..=4).map(|i| format!("SCT600-{i:02}")).collect(),
            equicorrelation: 0.0,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidConfig(msg));
        if self.n_runs == 0 {
            return bad("n_runs must be positive".into());
        }
        if self.cluster_weights.len() != self.clusters.len() || self.clusters.is_empty() {
            return bad(format!(
                "{} weights for {} clusters",
                self.cluster_weights.len(),
                self.clusters.len()
            ));
        }
        if self.cluster_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return bad("weights must be finite and non-negative".into());
        }
        let total: f64 = self.cluster_weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad(format!("weights sum to {total}, expected 1"));
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if !(c.mu_thick > 0.0 && c.sigma_thick >= 0.0 && c.diff_std >= 0.0 && c.diff_mean.is_finite()) {
                return bad(format!("cluster {i}: means must be positive and stds non-negative"));
            }
            if c.recipe_pool.is_empty() || c.year_pool.is_empty() {
                return bad(format!("cluster {i}: empty recipe or year pool"));
            }
        }
        let (lo, hi) = self.n_disks;
        if lo == 0 || lo > hi {
            return bad(format!("n_disks range ({lo}, {hi}) is empty"));
        }
        if !(self.disk_area_mean > 0.0 && self.disk_area_std >= 0.0 && self.nominal_increment > 0.0) {
            return bad("disk area mean and nominal increment must be positive".into());
        }
        if self.reactors.is_empty() {
            return bad("reactor pool is empty".into());
        }
        if !(0.0..1.0).contains(&self.equicorrelation) {
            return bad("equicorrelation must lie in [0, 1)".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        serde_json::from_str(text).map_err(|e| SynthError::InvalidConfig(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Schema of generated tables.
pub fn schema(max_disks: usize) -> Schema {
    let mut columns = vec![
        ColumnSpec::categorical(RUN_ID_COLUMN, Role::Meta),
        ColumnSpec::categorical(RECIPE_COLUMN, Role::Input),
        ColumnSpec::numeric(YEAR_COLUMN, Role::Input),
        ColumnSpec::categorical(REACTOR_COLUMN, Role::Input),
        ColumnSpec::numeric(N_DISKS_COLUMN, Role::Meta),
        ColumnSpec::vector(DISK_AREA_COLUMN, max_disks, Role::Input),
        ColumnSpec::numeric(NOMINAL_COLUMN, Role::Input),
    ];
    columns.extend(
        thickness_columns()
            .into_iter()
            .map(|c| ColumnSpec::numeric(c, Role::Output)),
    );
    Schema::new(columns).expect("generated schema is valid")
}

/// Draws from `N(mean, std)` restricted to `[lo, hi)` by rejection.
fn truncated<R: Rng>(rng: &mut R, mean: f64, std: f64, lo: f64, hi: f64) -> f64 {
    if std == 0.0 {
        return mean.clamp(lo, hi);
    }
    let normal = Normal::new(mean, std).expect("std is finite and non-negative");
    loop {
        let v = normal.sample(rng);
        if v >= lo && v < hi {
            return v;
        }
    }
}

/// Generates `n_runs` runs and their true cluster labels. Deterministic in
/// the config; runs are drawn sequentially from one stream.
///
/// Per-disk areas are drawn, the nominal area is the loaded total rounded up
/// to the next increment, and the disks are then rescaled so that
/// `nominal - total` equals a draw from the cluster's mismatch distribution
/// (truncated to `[0, increment)`). Unused disk slots hold area 0.
pub fn generate(cfg: &GenConfig) -> Result<(RunTable, ClusterLabels), SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n_runs;
    let max_disks = cfg.n_disks.1;
    let picker = WeightedIndex::new(&cfg.cluster_weights).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
    let disk_count = Uniform::new_inclusive(cfg.n_disks.0, cfg.n_disks.1).expect("range checked");
    let (shared, own) = (cfg.equicorrelation.sqrt(), (1.0 - cfg.equicorrelation).sqrt());

    let mut labels = Vec::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    let mut recipe = Vec::with_capacity(n);
    let mut year = Vec::with_capacity(n);
    let mut reactor = Vec::with_capacity(n);
    let mut n_disks = Vec::with_capacity(n);
    let mut areas = Vec::with_capacity(n * max_disks);
    let mut nominal = Vec::with_capacity(n);
    let mut thickness: Vec<Vec<f64>> = vec![Vec::with_capacity(n); MEASURED_DISKS * POSITIONS.len()];

    for run in 0..n {
        let c = picker.sample(&mut rng);
        let spec = &cfg.clusters[c];
        labels.push(c);
        ids.push(format!("run{:04}", run + 1));

        let common: f64 = StandardNormal.sample(&mut rng);
        for col in thickness.iter_mut() {
            let v = loop {
                let z: f64 = StandardNormal.sample(&mut rng);
                let v = spec.mu_thick + spec.sigma_thick * (shared * common + own * z);
                if v > 0.0 || spec.sigma_thick == 0.0 {
                    break v.max(0.0);
                }
            };
            col.push(v);
        }

        recipe.push(spec.recipe_pool.choose(&mut rng).expect("non-empty pool").clone());
        year.push(*spec.year_pool.choose(&mut rng).expect("non-empty pool") as f64);
        reactor.push(cfg.reactors.choose(&mut rng).expect("non-empty pool").clone());

        let loaded = disk_count.sample(&mut rng);
        let drawn: Vec<f64> = (0..loaded)
            .map(|_| {
                truncated(
                    &mut rng,
                    cfg.disk_area_mean,
                    cfg.disk_area_std,
                    0.1 * cfg.disk_area_mean,
                    f64::INFINITY,
                )
            })
            .collect();
        let raw_total: f64 = drawn.iter().sum();
        let nom = (raw_total / cfg.nominal_increment).ceil() * cfg.nominal_increment;
        let diff = truncated(&mut rng, spec.diff_mean, spec.diff_std, 0.0, cfg.nominal_increment);
        let scale = (nom - diff) / raw_total;
        areas.extend(drawn.iter().map(|a| a * scale));
        areas.extend(std::iter::repeat_n(0.0, max_disks - loaded));
        n_disks.push(loaded as f64);
        nominal.push(nom);
    }

    let mut columns = vec![
        ColumnData::Categorical(ids),
        ColumnData::Categorical(recipe),
        ColumnData::Numeric(year),
        ColumnData::Categorical(reactor),
        ColumnData::Numeric(n_disks),
        ColumnData::Vector {
            len: max_disks,
            values: areas,
        },
        ColumnData::Numeric(nominal),
    ];
    columns.extend(thickness.into_iter().map(ColumnData::Numeric));
    let table = RunTable::new(schema(max_disks), columns)?;
    Ok((table, ClusterLabels::new(labels)))
}

pub const RUNS_FILE: &str = "runs.csv";
pub const SCHEMA_FILE: &str = "schema.json";
pub const TRUTH_FILE: &str = "truth.csv";

/// Writes `runs.csv`, `schema.json` and `truth.csv` (run id and true cluster)
/// into `dir`, creating it if needed.
pub fn export(table: &RunTable, labels: &ClusterLabels, dir: &Path) -> Result<(), SynthError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| SynthError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let runs = dir.join(RUNS_FILE);
    let file = fs::File::create(&runs).map_err(io(&runs))?;
    write_csv(table, std::io::BufWriter::new(file))?;
    let schema_path = dir.join(SCHEMA_FILE);
    fs::write(&schema_path, table.schema().to_json()).map_err(io(&schema_path))?;
    let truth = dir.join(TRUTH_FILE);
    fs::write(&truth, truth_csv(table, labels)?).map_err(io(&truth))?;
    Ok(())
}

fn truth_csv(table: &RunTable, labels: &ClusterLabels) -> Result<String, SynthError> {
    let ids = table.categorical(RUN_ID_COLUMN)?;
    if ids.len() != labels.len() {
        return Err(DataError::LengthMismatch {
            expected: ids.len(),
            actual: labels.len(),
        }
        .into());
    }
    let mut out = format!("{RUN_ID_COLUMN},cluster\n");
    for (id, l) in ids.iter().zip(&labels.labels) {
        out.push_str(&format!("{id},{l}\n"));
    }
    Ok(out)
}

/// Reads a `truth.csv` written by [`export`]; labels are returned in file order.
pub fn read_truth(path: &Path) -> Result<(Vec<String>, ClusterLabels), SynthError> {
    let mut reader = csv::Reader::from_path(path).map_err(DataError::from)?;
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(DataError::from)?;
        let id = record.get(0).unwrap_or_default().to_string();
        let label = record
            .get(1)
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or(DataError::TypeMismatch {
                row: i + 1,
                column: "cluster".into(),
            })?;
        ids.push(id);
        labels.push(label);
    }
    Ok((ids, ClusterLabels::new(labels)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shape() {
        let (t, labels) = generate(&GenConfig::default()).unwrap();
        assert_eq!(t.n_rows(), 603);
        assert_eq!(t.output_matrix().dim(), (603, 15));
        assert_eq!(labels.k, 3);
    }

    #[test]
    fn degenerate_weights() {
        let cfg = GenConfig {
            cluster_weights: vec![1.0, 0.0, 0.0],
            n_runs: 200,
            ..GenConfig::default()
        };
        let (t, labels) = generate(&cfg).unwrap();
        assert!(labels.labels.iter().all(|&l| l == 0));
        let out = t.output_matrix();
        let mu = out.mean().unwrap();
        // 3000 cells, standard error 1.354 / sqrt(3000) ~ 0.025
        assert!((mu - 16.35).abs() < 0.1, "{mu}");
    }

    #[test]
    fn nominal_is_a_multiple_and_recipes_respect_pools() {
        let cfg = GenConfig::default();
        let (t, labels) = generate(&cfg).unwrap();
        for &nom in t.numeric(NOMINAL_COLUMN).unwrap() {
            assert_eq!((nom / cfg.nominal_increment).fract(), 0.0);
        }
        for (r, &l) in t.categorical(RECIPE_COLUMN).unwrap().iter().zip(&labels.labels) {
            assert_eq!(r.ends_with("V21"), l == 0);
        }
    }

    #[test]
    fn disk_slots_and_mismatch() {
        let cfg = GenConfig::default();
        let (t, _) = generate(&cfg).unwrap();
        let nominal = t.numeric(NOMINAL_COLUMN).unwrap();
        let counts = t.numeric(N_DISKS_COLUMN).unwrap();
        for r in 0..t.n_rows() {
            let disks = t.vector_row(DISK_AREA_COLUMN, r).unwrap();
            let loaded = disks.iter().filter(|&&a| a > 0.0).count();
            assert_eq!(loaded as f64, counts[r]);
            assert!((40..=50).contains(&loaded));
            let diff = nominal[r] - disks.iter().sum::<f64>();
            assert!((-1e-6..cfg.nominal_increment).contains(&diff), "{diff}");
        }
    }

    #[test]
    fn invalid_configs() {
        let cases = [
            GenConfig {
                cluster_weights: vec![0.5, 0.5],
                ..GenConfig::default()
            },
            GenConfig {
                cluster_weights: vec![0.5, 0.4, 0.4],
                ..GenConfig::default()
            },
            GenConfig {
                n_runs: 0,
                ..GenConfig::default()
            },
            GenConfig {
                n_disks: (50, 40),
                ..GenConfig::default()
            },
            GenConfig {
                equicorrelation: 1.0,
                ..GenConfig::default()
            },
        ];
        for cfg in cases {
            assert!(matches!(generate(&cfg), Err(SynthError::InvalidConfig(_))));
        }
    }

    #[test]
    fn config_json_round_trip_and_defaults() {
        let cfg = GenConfig::default().with_seed(9);
        assert_eq!(GenConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        let partial = GenConfig::from_json(r#"{"n_runs": 10, "seed": 4}"#).unwrap();
        assert_eq!(partial.n_runs, 10);
        assert_eq!(partial.clusters, GenConfig::default().clusters);
    }
}
