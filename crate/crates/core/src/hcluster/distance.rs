use ndarray::ArrayView2;

use super::ClusterError;
use crate::Scalar;

/// Upper triangle (without diagonal) of a symmetric `n × n` matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CondensedMatrix<F> {
    n: usize,
    data: Vec<F>,
}

impl<F: Scalar> CondensedMatrix<F> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                data.push(f(i, j));
            }
        }
        CondensedMatrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        debug_assert!(i != j && j < self.n);
        self.n * i - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Entry `(i, j)`; the diagonal is zero.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        if i == j {
            F::zero()
        } else {
            self.data[self.offset(i, j)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        let o = self.offset(i, j);
        self.data[o] = v;
    }
}

pub(crate) fn check_finite<F: Scalar>(x: &ArrayView2<'_, F>) -> Result<(), ClusterError> {
    for ((row, col), v) in x.indexed_iter() {
        if !v.is_finite() {
            return Err(ClusterError::NonFiniteInput { row, col });
        }
    }
    Ok(())
}

/// Squared Euclidean distances between all row pairs of `x`.
pub fn pairwise_sq_euclidean<F: Scalar>(x: ArrayView2<'_, F>) -> Result<CondensedMatrix<F>, ClusterError> {
    let n = x.nrows();
    if n < 2 {
        return Err(ClusterError::TooFewObservations(n));
    }
    check_finite(&x)?;
    Ok(CondensedMatrix::from_fn(n, |i, j| {
        x.row(i)
            .iter()
            .zip(x.row(j))
            .map(|(&a, &b)| (a - b) * (a - b))
            .fold(F::zero(), |s, d| s + d)
    }))
}
