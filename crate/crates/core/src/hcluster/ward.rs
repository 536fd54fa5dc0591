use std::cmp::Ordering;

use ndarray::ArrayView2;

use super::distance::check_finite;
use super::{pairwise_sq_euclidean, ClusterError, Dendrogram, Merge};
use crate::Scalar;

/// Candidate merge ordered by (squared dissimilarity, smaller node id, larger node id).
#[derive(Clone, Copy, Debug)]
struct Candidate<F> {
    d2: F,
    lo: usize,
    hi: usize,
    partner: usize,
}

impl<F: Scalar> Candidate<F> {
    fn new(d2: F, id_a: usize, id_b: usize, partner: usize) -> Self {
        Candidate {
            d2,
            lo: id_a.min(id_b),
            hi: id_a.max(id_b),
            partner,
        }
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        self.d2
            .partial_cmp(&other.d2)
            .unwrap_or(Ordering::Equal)
            .then(self.lo.cmp(&other.lo))
            .then(self.hi.cmp(&other.hi))
    }
}

/// Ward-linkage agglomerative clustering of the rows of `x`.
///
/// Dissimilarities follow the Lance–Williams recurrence in the distance-scaled
/// convention, so a merge of two singletons happens at their Euclidean
/// distance and, in general, `height² = 2 · ΔSSE`. Each step merges the pair
/// with the smallest dissimilarity; ties go to the lexicographically smallest
/// `(smaller id, larger id)` pair. Leaves are ids `0..n`, merge `k` creates
/// node `n + k`.
///
/// Every active cluster caches its nearest neighbour, so a step costs `O(n)`
/// unless a merge invalidates many caches.
pub fn ward_linkage<F: Scalar>(x: ArrayView2<'_, F>) -> Result<Dendrogram<F>, ClusterError> {
    check_finite(&x)?;
    let mut dist = pairwise_sq_euclidean(x)?;
    let n = x.nrows();

    let mut active = vec![true; n];
    let mut node_id: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];

    let nearest = |slot: usize, dist: &super::CondensedMatrix<F>, active: &[bool], node_id: &[usize]| {
        let mut best: Option<Candidate<F>> = None;
        for other in (0..n).filter(|&o| o != slot && active[o]) {
            let c = Candidate::new(dist.get(slot, other), node_id[slot], node_id[other], other);
            if best.as_ref().is_none_or(|b| c.cmp_key(b) == Ordering::Less) {
                best = Some(c);
            }
        }
        best
    };

    let mut best: Vec<Option<Candidate<F>>> = (0..n).map(|s| nearest(s, &dist, &active, &node_id)).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let (a, cand) = best
            .iter()
            .enumerate()
            .filter(|(s, _)| active[*s])
            .filter_map(|(s, c)| c.map(|c| (s, c)))
            .min_by(|(_, p), (_, q)| p.cmp_key(q))
            .expect("at least two active clusters remain");
        let b = cand.partner;
        let d2_ab = cand.d2;
        let (size_a, size_b) = (size[a], size[b]);

        merges.push(Merge {
            left: cand.lo,
            right: cand.hi,
            height: d2_ab.max(F::zero()).sqrt(),
            size: size_a + size_b,
        });

        // Lance–Williams update; the merged cluster takes slot `a`.
        let na = F::of_usize(size_a);
        let nb = F::of_usize(size_b);
        for y in (0..n).filter(|&y| active[y] && y != a && y != b) {
            let ny = F::of_usize(size[y]);
            let d2 = ((na + ny) * dist.get(a, y) + (nb + ny) * dist.get(b, y) - ny * d2_ab) / (na + nb + ny);
            // Reducibility makes d2 >= d2_ab exactly; clamp rounding below it.
            dist.set(a, y, d2.max(d2_ab));
        }
        active[b] = false;
        best[b] = None;
        node_id[a] = n + step;
        size[a] = size_a + size_b;

        if step + 2 == n {
            break;
        }
        best[a] = nearest(a, &dist, &active, &node_id);
        for y in (0..n).filter(|&y| active[y] && y != a) {
            let stale = best[y].is_none_or(|c| c.partner == a || c.partner == b);
            if stale {
                best[y] = nearest(y, &dist, &active, &node_id);
            } else {
                let c = Candidate::new(dist.get(a, y), node_id[y], node_id[a], a);
                if best[y].is_some_and(|b| c.cmp_key(&b) == Ordering::Less) {
                    best[y] = Some(c);
                }
            }
        }
    }
    Ok(Dendrogram::new(n, merges))
}
