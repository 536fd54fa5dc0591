//! Agglomerative clustering with Ward linkage, dendrograms and flat cuts.

mod dendrogram;
mod distance;
mod ward;

pub use dendrogram::{ClusterLabels, Dendrogram, Merge};
pub use distance::{pairwise_sq_euclidean, CondensedMatrix};
pub use ward::ward_linkage;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("input contains a non-finite value at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },
    #[error("need at least 2 observations, got {0}")]
    TooFewObservations(usize),
    #[error("k = {k} is outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("{expected} scores expected, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}
