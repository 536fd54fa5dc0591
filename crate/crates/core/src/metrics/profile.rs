use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::data::{ColumnData, RunTable};
use crate::hcluster::ClusterLabels;
use crate::Scalar;

pub const HISTOGRAM_BINS: usize = 20;

/// Population moments. Skewness and excess kurtosis are 0 for constant data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments<F> {
    pub mean: F,
    pub std: F,
    pub skewness: F,
    pub excess_kurtosis: F,
}

pub fn moments<F: Scalar>(values: &[F]) -> Moments<F> {
    let n = F::of_usize(values.len().max(1));
    let mean = values.iter().copied().sum::<F>() / n;
    let (mut m2, mut m3, mut m4) = (F::zero(), F::zero(), F::zero());
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 = m2 + d2;
        m3 = m3 + d2 * d;
        m4 = m4 + d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let (skewness, excess_kurtosis) = if m2 > F::zero() {
        (m3 / m2.powf(F::of(1.5)), m4 / (m2 * m2) - F::of(3.0))
    } else {
        (F::zero(), F::zero())
    };
    Moments {
        mean,
        std: m2.sqrt(),
        skewness,
        excess_kurtosis,
    }
}

/// Output statistics of one cluster, pooled over every output cell of every
/// member run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub cluster: usize,
    pub member_count: usize,
    pub mu_thick: f64,
    pub sigma_thick: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputProfile {
    Numeric {
        column: String,
        per_cluster_mean: Vec<f64>,
        /// `HISTOGRAM_BINS + 1` edges spanning the column's range.
        bin_edges: Vec<f64>,
        histograms: Vec<Vec<usize>>,
    },
    Categorical {
        column: String,
        categories: Vec<String>,
        /// `counts[cluster][category]`.
        counts: Vec<Vec<usize>>,
        predominant: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub clusters: Vec<ClusterStats>,
    pub inputs: Vec<InputProfile>,
}

pub fn profile_clusters(
    table: &RunTable,
    labels: &ClusterLabels,
    inputs_of_interest: &[String],
) -> Result<ClusterProfile, MetricsError> {
    let n = table.n_rows();
    if labels.len() != n {
        return Err(MetricsError::LengthMismatch(labels.len(), n));
    }
    let k = labels.k;
    let outputs = table.output_matrix();
    let mut pooled: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (row, &l) in outputs.rows().into_iter().zip(&labels.labels) {
        pooled[l].extend(row.iter().copied());
    }
    let sizes = labels.sizes();
    let clusters = pooled
        .iter()
        .enumerate()
        .map(|(c, cells)| {
            let m = moments(cells);
            ClusterStats {
                cluster: c,
                member_count: sizes[c],
                mu_thick: m.mean,
                sigma_thick: m.std,
                skewness: m.skewness,
                excess_kurtosis: m.excess_kurtosis,
            }
        })
        .collect();

    let mut inputs = Vec::with_capacity(inputs_of_interest.len());
    for name in inputs_of_interest {
        let (_, data) = table
            .column(name)
            .map_err(|e| MetricsError::Column(name.clone(), e.to_string()))?;
        inputs.push(match data {
            ColumnData::Numeric(values) => numeric_profile(name, values, &labels.labels, k),
            ColumnData::Categorical(values) => categorical_profile(name, values, &labels.labels, k),
            ColumnData::Vector { .. } => {
                return Err(MetricsError::Column(
                    name.clone(),
                    "vector columns cannot be profiled".into(),
                ))
            }
        });
    }
    Ok(ClusterProfile { clusters, inputs })
}

fn numeric_profile(name: &str, values: &[f64], labels: &[usize], k: usize) -> InputProfile {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo {
        (hi - lo) / HISTOGRAM_BINS as f64
    } else {
        1.0
    };
    let bin_edges = (0..=HISTOGRAM_BINS).map(|i| lo + width * i as f64).collect();
    let mut histograms = vec![vec![0; HISTOGRAM_BINS]; k];
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (&v, &l) in values.iter().zip(labels) {
        let bin = (((v - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
        histograms[l][bin] += 1;
        sums[l] += v;
        counts[l] += 1;
    }
    InputProfile::Numeric {
        column: name.to_string(),
        per_cluster_mean: sums.iter().zip(&counts).map(|(s, &c)| s / c.max(1) as f64).collect(),
        bin_edges,
        histograms,
    }
}

fn categorical_profile(name: &str, values: &[String], labels: &[usize], k: usize) -> InputProfile {
    let mut categories: Vec<String> = values.to_vec();
    categories.sort();
    categories.dedup();
    let mut counts = vec![vec![0; categories.len()]; k];
    for (v, &l) in values.iter().zip(labels) {
        counts[l][categories.binary_search(v).expect("category present")] += 1;
    }
    let predominant = counts
        .iter()
        .map(|row| {
            let best = (0..row.len()).fold(0, |b, i| if row[i] > row[b] { i } else { b });
            categories[best].clone()
        })
        .collect();
    InputProfile::Categorical {
        column: name.to_string(),
        categories,
        counts,
        predominant,
    }
}
