use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{argmax, check_inputs, grow_tree};
use super::{ForestError, ForestParams, LeafValue, Targets, Task, Tree};
use crate::Scalar;

pub const FOREST_FORMAT_VERSION: u32 = 1;

/// Bagged ensemble of CART trees sharing one feature space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest<F> {
    pub format_version: u32,
    pub params: ForestParams,
    /// Class names for `0..K`; `None` for regression.
    pub classes: Option<Vec<String>>,
    pub feature_names: Vec<String>,
    pub trees: Vec<Tree<F>>,
}

/// RNG for tree `index`: depends only on the forest seed and the index.
fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Fits `params.tree_count` trees in parallel.
///
/// `feature_names` may be empty, in which case `x0..x{p-1}` are used.
pub fn fit_forest<F: Scalar>(
    x: ArrayView2<'_, F>,
    targets: Targets<'_, F>,
    params: &ForestParams,
    feature_names: &[String],
) -> Result<Forest<F>, ForestError> {
    params.validate()?;
    check_inputs(&x, &targets)?;
    let p = x.ncols();
    let feature_names = if feature_names.is_empty() {
        (0..p).map(|j| format!("x{j}")).collect()
    } else if feature_names.len() != p {
        return Err(ForestError::DimensionMismatch {
            expected: p,
            actual: feature_names.len(),
        });
    } else {
        feature_names.to_vec()
    };
    let classes = match (&targets, params.task) {
        (Targets::Classes { n_classes, .. }, Task::Classify) => Some((0..*n_classes).map(|c| c.to_string()).collect()),
        (Targets::Values(_), Task::Regress) => None,
        (_, Task::Classify) => return Err(ForestError::WrongTask("classification")),
        (_, Task::Regress) => return Err(ForestError::WrongTask("regression")),
    };

    let n = x.nrows();
    let trees = (0..params.tree_count)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(params.seed, t);
            let samples = if params.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow_tree(x, targets, params, samples, &mut rng)
        })
        .collect();

    Ok(Forest {
        format_version: FOREST_FORMAT_VERSION,
        params: params.clone(),
        classes,
        feature_names,
        trees,
    })
}

impl<F: Scalar> Forest<F> {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> Option<usize> {
        self.classes.as_ref().map(Vec::len)
    }

    fn check_width(&self, p: usize) -> Result<(), ForestError> {
        if p != self.n_features() {
            return Err(ForestError::DimensionMismatch {
                expected: self.n_features(),
                actual: p,
            });
        }
        Ok(())
    }

    /// Mean of the trees' leaf class frequencies for one row.
    pub fn proba_row(&self, row: &[F]) -> Result<Vec<F>, ForestError> {
        let k = self.n_classes().ok_or(ForestError::WrongTask("classification"))?;
        self.check_width(row.len())?;
        let mut acc = vec![0f64; k];
        for tree in &self.trees {
            if let LeafValue::Classes(p) = tree.leaf(row) {
                for (a, v) in acc.iter_mut().zip(p) {
                    *a += v.as_f64();
                }
            }
        }
        let t = self.trees.len() as f64;
        Ok(acc.into_iter().map(|a| F::of(a / t)).collect())
    }

    /// Regression: mean of tree means. Classification: argmax of
    /// [`Self::proba_row`] (lowest class on ties), returned as `F`.
    pub fn predict_row(&self, row: &[F]) -> Result<F, ForestError> {
        self.check_width(row.len())?;
        match self.params.task {
            Task::Regress => {
                let sum: f64 = self
                    .trees
                    .iter()
                    .map(|t| match t.leaf(row) {
                        LeafValue::Mean(m) => m.as_f64(),
                        LeafValue::Classes(_) => unreachable!("regression tree"),
                    })
                    .sum();
                Ok(F::of(sum / self.trees.len() as f64))
            }
            Task::Classify => Ok(F::of_usize(argmax(&self.proba_row(row)?))),
        }
    }

    fn rows(x: &ArrayView2<'_, F>) -> Vec<Vec<F>> {
        x.rows().into_iter().map(|r| r.to_vec()).collect()
    }

    pub fn predict_proba(&self, x: ArrayView2<'_, F>) -> Result<Array2<F>, ForestError> {
        let k = self.n_classes().ok_or(ForestError::WrongTask("classification"))?;
        self.check_width(x.ncols())?;
        let rows: Vec<Vec<F>> = Self::rows(&x)
            .par_iter()
            .map(|r| self.proba_row(r))
            .collect::<Result<_, _>>()?;
        Ok(Array2::from_shape_fn((x.nrows(), k), |(i, j)| rows[i][j]))
    }

    /// Class labels (classification) as indices.
    pub fn predict_classes(&self, x: ArrayView2<'_, F>) -> Result<Vec<usize>, ForestError> {
        let proba = self.predict_proba(x)?;
        Ok(proba
            .rows()
            .into_iter()
            .map(|r| argmax(r.as_slice().unwrap()))
            .collect())
    }

    /// Real-valued predictions (regression).
    pub fn predict_values(&self, x: ArrayView2<'_, F>) -> Result<Vec<F>, ForestError> {
        if self.params.task != Task::Regress {
            return Err(ForestError::WrongTask("regression"));
        }
        self.check_width(x.ncols())?;
        Self::rows(&x).par_iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ForestError> {
        let f: Forest<F> = serde_json::from_str(text)?;
        if f.format_version != FOREST_FORMAT_VERSION {
            return Err(ForestError::UnsupportedVersion(f.format_version));
        }
        Ok(f)
    }
}
