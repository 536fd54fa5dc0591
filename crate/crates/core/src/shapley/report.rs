use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ShapError;
use crate::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance<F> {
    pub name: String,
    pub mean_abs_shap: F,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceAttribution<F> {
    pub id: String,
    pub phi: BTreeMap<String, F>,
}

/// Attributions for a set of instances with the global ranking.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapReport<F> {
    pub base_value: F,
    /// Sorted by decreasing mean |φ|.
    pub features: Vec<FeatureImportance<F>>,
    pub instances: Vec<InstanceAttribution<F>>,
}

impl<F: Scalar> ShapReport<F> {
    pub fn new(base_value: F, names: &[String], ids: &[String], phis: &[Vec<F>]) -> Result<Self, ShapError> {
        if ids.len() != phis.len() {
            return Err(ShapError::DimensionMismatch {
                expected: ids.len(),
                actual: phis.len(),
            });
        }
        let features = global_ranking(names, phis)?;
        let instances = ids
            .iter()
            .zip(phis)
            .map(|(id, phi)| InstanceAttribution {
                id: id.clone(),
                phi: names.iter().cloned().zip(phi.iter().copied()).collect(),
            })
            .collect();
        Ok(ShapReport {
            base_value,
            features,
            instances,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Mean |φ| per feature over the instances, descending, ties by name.
pub fn global_ranking<F: Scalar>(names: &[String], phis: &[Vec<F>]) -> Result<Vec<FeatureImportance<F>>, ShapError> {
    if phis.is_empty() {
        return Err(ShapError::NoInstances);
    }
    if let Some(bad) = phis.iter().find(|p| p.len() != names.len()) {
        return Err(ShapError::DimensionMismatch {
            expected: names.len(),
            actual: bad.len(),
        });
    }
    let n = phis.len() as f64;
    let mut ranking: Vec<(String, f64)> = names
        .iter()
        .enumerate()
        .map(|(j, name)| (name.clone(), phis.iter().map(|p| p[j].as_f64().abs()).sum::<f64>() / n))
        .collect();
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranking
        .into_iter()
        .map(|(name, v)| FeatureImportance {
            name,
            mean_abs_shap: F::of(v),
        })
        .collect())
}
