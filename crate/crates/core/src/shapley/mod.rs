//! Interventional Shapley attributions.
//!
//! The value of a coalition `S` is the mean model output over the background
//! rows with the instance's values substituted on the columns of `S`. Columns
//! can be grouped (for example the one-hot block of a categorical input) so
//! that a group is toggled as a single player.

mod exact;
mod report;
mod sampled;
mod tree;

use ndarray::{Array2, ArrayView2};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use exact::shap_exact;
pub use report::{global_ranking, FeatureImportance, InstanceAttribution, ShapReport};
pub use sampled::shap_sampled;
pub use tree::{forest_shap, ForestOutput};

use crate::Scalar;

/// Largest player count accepted by exact enumeration.
pub const MAX_EXACT_FEATURES: usize = 15;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ShapError {
    #[error("exact mode supports at most {max} features, got {m}; use sampled mode")]
    TooManyFeatures { m: usize, max: usize },
    #[error("background set is empty")]
    EmptyBackground,
    #[error("expected {expected} columns, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("groups must partition columns 0..{0} without gaps or overlaps")]
    InvalidGroups(usize),
    #[error("n_permutations must be at least 1")]
    NoPermutations,
    #[error("no instances to rank")]
    NoInstances,
    #[error("{0}")]
    Model(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ShapMode {
    Exact,
    Sampled { n_permutations: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct ShapConfig<F> {
    pub background: Array2<F>,
    pub mode: ShapMode,
    /// Column groups toggled together. `None` makes every column its own player.
    pub groups: Option<Vec<Vec<usize>>>,
}

impl<F: Scalar> ShapConfig<F> {
    pub fn exact(background: Array2<F>) -> Self {
        ShapConfig {
            background,
            mode: ShapMode::Exact,
            groups: None,
        }
    }

    pub fn sampled(background: Array2<F>, n_permutations: usize, seed: u64) -> Self {
        ShapConfig {
            background,
            mode: ShapMode::Sampled { n_permutations, seed },
            groups: None,
        }
    }

    pub fn with_groups(mut self, groups: Vec<Vec<usize>>) -> Self {
        self.groups = Some(groups);
        self
    }

    pub fn n_columns(&self) -> usize {
        self.background.ncols()
    }

    /// Player groups, checked to partition the columns.
    pub fn players(&self) -> Result<Vec<Vec<usize>>, ShapError> {
        let p = self.n_columns();
        let groups = match &self.groups {
            None => return Ok((0..p).map(|c| vec![c]).collect()),
            Some(g) => g.clone(),
        };
        let mut seen = vec![false; p];
        for &c in groups.iter().flatten() {
            if c >= p || std::mem::replace(&mut seen[c], true) {
                return Err(ShapError::InvalidGroups(p));
            }
        }
        if seen.contains(&false) || groups.iter().any(Vec::is_empty) {
            return Err(ShapError::InvalidGroups(p));
        }
        Ok(groups)
    }

    pub(crate) fn check(&self, instance: &[F]) -> Result<Vec<Vec<usize>>, ShapError> {
        if self.background.nrows() == 0 {
            return Err(ShapError::EmptyBackground);
        }
        if instance.len() != self.n_columns() {
            return Err(ShapError::DimensionMismatch {
                expected: self.n_columns(),
                actual: instance.len(),
            });
        }
        self.players()
    }
}

/// Mean model output over the background rows.
pub fn base_value<F: Scalar, M>(model: &M, background: ArrayView2<'_, F>) -> F
where
    M: Fn(&[F]) -> F,
{
    let total: f64 = background.rows().into_iter().map(|r| model(&r.to_vec()).as_f64()).sum();
    F::of(total / background.nrows().max(1) as f64)
}

/// Seeded subsample of at most `cap` rows, kept in their original order.
pub fn subsample_rows<F: Scalar>(x: ArrayView2<'_, F>, cap: usize, seed: u64) -> Array2<F> {
    if x.nrows() <= cap {
        return x.to_owned();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, x.nrows(), cap).into_vec();
    idx.sort_unstable();
    x.select(ndarray::Axis(0), &idx)
}

/// Weight `s!(m-s-1)!/m!` of a coalition of size `s` among `m` players.
pub(crate) fn coalition_weights(m: usize) -> Vec<f64> {
    let fact: Vec<f64> = (0..=m)
        .scan(1.0, |acc, i| {
            if i > 0 {
                *acc *= i as f64;
            }
            Some(*acc)
        })
        .collect();
    (0..m).map(|s| fact[s] * fact[m - s - 1] / fact[m]).collect()
}
