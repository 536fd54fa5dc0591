//! Principal component projection of the output block.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PcaError {
    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("component count {q} outside 1..={max}")]
    InvalidComponentCount { q: usize, max: usize },
    #[error("expected {expected} columns, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("input contains a non-finite value")]
    NonFiniteInput,
}

/// Fitted projection: `components` rows are orthonormal, sorted by
/// non-increasing `explained_variance` (population covariance eigenvalues).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel<F> {
    pub mean: Array1<F>,
    pub components: Array2<F>,
    pub explained_variance: Array1<F>,
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted descending and the matching eigenvectors as
/// columns.
pub fn symmetric_eigen<F: Scalar>(mut a: Array2<F>) -> (Array1<F>, Array2<F>) {
    let p = a.nrows();
    let mut v = Array2::<F>::eye(p);
    let two = F::of(2.0);
    let scale = a.iter().fold(F::zero(), |s, &x| s + x * x).sqrt();
    let tol = F::epsilon() * scale.max(F::min_positive_value());

    for _sweep in 0..100 {
        let mut off = F::zero();
        for i in 0..p {
            for j in i + 1..p {
                off = off + a[[i, j]] * a[[i, j]];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for i in 0..p {
            for j in i + 1..p {
                let aij = a[[i, j]];
                if aij == F::zero() {
                    continue;
                }
                let theta = (a[[j, j]] - a[[i, i]]) / (two * aij);
                let t = theta.signum() / (theta.abs() + (theta * theta + F::one()).sqrt());
                let c = F::one() / (t * t + F::one()).sqrt();
                let s = t * c;
                for k in 0..p {
                    let (aki, akj) = (a[[k, i]], a[[k, j]]);
                    a[[k, i]] = c * aki - s * akj;
                    a[[k, j]] = s * aki + c * akj;
                }
                for k in 0..p {
                    let (aik, ajk) = (a[[i, k]], a[[j, k]]);
                    a[[i, k]] = c * aik - s * ajk;
                    a[[j, k]] = s * aik + c * ajk;
                }
                for k in 0..p {
                    let (vki, vkj) = (v[[k, i]], v[[k, j]]);
                    v[[k, i]] = c * vki - s * vkj;
                    v[[k, j]] = s * vki + c * vkj;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| {
        a[[y, y]]
            .partial_cmp(&a[[x, x]])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.cmp(&y))
    });
    let values = Array1::from_iter(order.iter().map(|&i| a[[i, i]]));
    let vectors = v.select(Axis(1), &order);
    (values, vectors)
}

/// Mean-centred PCA with `q` components.
pub fn pca_fit<F: Scalar>(x: ArrayView2<'_, F>, q: usize) -> Result<PcaModel<F>, PcaError> {
    let (n, p) = x.dim();
    if n < 2 {
        return Err(PcaError::TooFewObservations(n));
    }
    let max = (n - 1).min(p);
    if q == 0 || q > max {
        return Err(PcaError::InvalidComponentCount { q, max });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(PcaError::NonFiniteInput);
    }
    let nf = F::of_usize(n);
    let mean = x.sum_axis(Axis(0)) / nf;
    let centered = &x - &mean;
    let cov = centered.t().dot(&centered) / nf;
    let (values, vectors) = symmetric_eigen(cov);

    let mut components = Array2::zeros((q, p));
    for c in 0..q {
        let mut col = vectors.column(c).to_owned();
        // Largest-magnitude entry positive; first index wins ties.
        let pivot = (0..p).fold(0, |best, i| if col[i].abs() > col[best].abs() { i } else { best });
        if col[pivot] < F::zero() {
            col.mapv_inplace(|v| -v);
        }
        components.row_mut(c).assign(&col);
    }
    let explained_variance = values.iter().take(q).map(|&v| v.max(F::zero())).collect();
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
    })
}

impl<F: Scalar> PcaModel<F> {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    /// Scores `(x - mean) · componentsᵀ`.
    pub fn transform(&self, x: ArrayView2<'_, F>) -> Result<Array2<F>, PcaError> {
        if x.ncols() != self.mean.len() {
            return Err(PcaError::DimensionMismatch {
                expected: self.mean.len(),
                actual: x.ncols(),
            });
        }
        Ok((&x - &self.mean).dot(&self.components.t()))
    }

    /// Maps scores back to the input space.
    pub fn inverse_transform(&self, scores: ArrayView2<'_, F>) -> Result<Array2<F>, PcaError> {
        if scores.ncols() != self.n_components() {
            return Err(PcaError::DimensionMismatch {
                expected: self.n_components(),
                actual: scores.ncols(),
            });
        }
        Ok(scores.dot(&self.components) + &self.mean)
    }
}

/// Scores as CSV with header `pc1..pcq`, optionally prefixed by a label column.
pub fn scores_csv<F: Scalar>(scores: ArrayView2<'_, F>, labels: Option<&[usize]>) -> String {
    let mut out = String::new();
    if labels.is_some() {
        out.push_str("cluster,");
    }
    let header: Vec<String> = (1..=scores.ncols()).map(|i| format!("pc{i}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (r, row) in scores.rows().into_iter().enumerate() {
        if let Some(l) = labels {
            out.push_str(&format!("{},", l[r]));
        }
        let cells: Vec<String> = row.iter().map(|v| v.as_f64().to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn line_y_equals_x() {
        let x = array![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [-3.0, -3.0]];
        let m = pca_fit(x.view(), 2).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((m.components[[0, 0]] - r).abs() < 1e-12);
        assert!((m.components[[0, 1]] - r).abs() < 1e-12);
        assert!(m.explained_variance[1].abs() < 1e-12);
    }

    #[test]
    fn identical_rows_have_no_variance() {
        let x = array![[1.0f32, 2.0, 3.0], [1.0, 2.0, 3.0], [1.0, 2.0, 3.0], [1.0, 2.0, 3.0]];
        let m = pca_fit(x.view(), 3).unwrap();
        assert!(m.explained_variance.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mean_row_maps_to_origin() {
        let x: Array2<f64> = array![[1.0, 5.0], [3.0, -1.0], [2.0, 2.0]];
        let m = pca_fit(x.view(), 1).unwrap();
        let s = m.transform(m.mean.view().insert_axis(Axis(0))).unwrap();
        assert!(s[[0, 0]].abs() < 1e-12);
        assert_eq!(
            m.transform(array![[1.0, 2.0, 3.0]].view()).unwrap_err(),
            PcaError::DimensionMismatch { expected: 2, actual: 3 }
        );
    }

    #[test]
    fn scores_csv_layout() {
        let s = array![[1.0, 2.0], [3.0, 4.5]];
        assert_eq!(scores_csv(s.view(), Some(&[0, 1])), "cluster,pc1,pc2\n0,1,2\n1,3,4.5\n");
    }
}
