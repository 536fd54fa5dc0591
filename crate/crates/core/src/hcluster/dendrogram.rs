use std::fmt::Write as _;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::ClusterError;
use crate::Scalar;

/// One agglomeration step: nodes `left < right` joined at `height`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Merge<F> {
    pub left: usize,
    pub right: usize,
    pub height: F,
    pub size: usize,
}

/// Full merge history of an agglomerative clustering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram<F> {
    n_leaves: usize,
    merges: Vec<Merge<F>>,
}

/// Flat partition: `labels[i]` in `0..k`, every label used.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterLabels {
    pub labels: Vec<usize>,
    pub k: usize,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl<F: Scalar> Dendrogram<F> {
    pub fn new(n_leaves: usize, merges: Vec<Merge<F>>) -> Self {
        debug_assert_eq!(merges.len() + 1, n_leaves);
        Dendrogram { n_leaves, merges }
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge<F>] {
        &self.merges
    }

    /// Number of members of node `id`.
    pub fn node_size(&self, id: usize) -> usize {
        if id < self.n_leaves {
            1
        } else {
            self.merges[id - self.n_leaves].size
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.merges.windows(2).all(|w| w[0].height <= w[1].height)
    }

    /// Partition formed by applying only the merges accepted by `keep`.
    fn components(&self, keep: impl Fn(usize, &Merge<F>) -> bool) -> ClusterLabels {
        let n = self.n_leaves;
        let mut sets = DisjointSet::new(n);
        // Any leaf of each node stands in for it.
        let mut leaf_of: Vec<usize> = (0..n).collect();
        for (k, m) in self.merges.iter().enumerate() {
            let (l, r) = (leaf_of[m.left], leaf_of[m.right]);
            leaf_of.push(l);
            if keep(k, m) {
                sets.union(l, r);
            }
        }
        let mut label_of_root = vec![usize::MAX; n];
        let mut labels = Vec::with_capacity(n);
        let mut k = 0;
        for i in 0..n {
            let root = sets.find(i);
            if label_of_root[root] == usize::MAX {
                label_of_root[root] = k;
                k += 1;
            }
            labels.push(label_of_root[root]);
        }
        ClusterLabels { labels, k }
    }

    /// Undoes the last `k - 1` merges. Labels follow first appearance by row.
    pub fn cut_k(&self, k: usize) -> Result<ClusterLabels, ClusterError> {
        if k == 0 || k > self.n_leaves {
            return Err(ClusterError::KOutOfRange { k, n: self.n_leaves });
        }
        let applied = self.n_leaves - k;
        Ok(self.components(|i, _| i < applied))
    }

    /// Connected components of the merges with height `<= h`.
    pub fn cut_height(&self, h: F) -> ClusterLabels {
        self.components(|_, m| m.height <= h)
    }

    /// Leaves in recursive left-then-right order from the root.
    pub fn leaf_order(&self) -> Vec<usize> {
        let n = self.n_leaves;
        let mut out = Vec::with_capacity(n);
        let mut stack = vec![if n == 1 { 0 } else { 2 * n - 2 }];
        while let Some(id) = stack.pop() {
            if id < n {
                out.push(id);
            } else {
                let m = &self.merges[id - n];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dendrogram serializes")
    }

    /// Graphviz digraph; internal nodes labelled with their height and size.
    pub fn to_dot(&self) -> String {
        let n = self.n_leaves;
        let mut s = String::from("digraph dendrogram {\n  node [shape=box];\n");
        for i in 0..n {
            let _ = writeln!(s, "  n{i} [label=\"{i}\"];");
        }
        for (k, m) in self.merges.iter().enumerate() {
            let id = n + k;
            let h = m.height.as_f64();
            let _ = writeln!(s, "  n{id} [label=\"h={h:.6}\\nsize={}\"];", m.size);
            let _ = writeln!(s, "  n{id} -> n{} [label=\"{h:.6}\"];", m.left);
            let _ = writeln!(s, "  n{id} -> n{} [label=\"{h:.6}\"];", m.right);
        }
        s.push_str("}\n");
        s
    }
}

impl ClusterLabels {
    pub fn new(labels: Vec<usize>) -> Self {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        ClusterLabels { labels, k }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    /// Relabels clusters by decreasing mean of a per-row score; ties keep the
    /// current order.
    pub fn ranked_by<F: Scalar>(&self, scores: &[F]) -> Result<ClusterLabels, ClusterError> {
        if scores.len() != self.labels.len() {
            return Err(ClusterError::LengthMismatch {
                expected: self.labels.len(),
                actual: scores.len(),
            });
        }
        let mut sum = vec![0.0f64; self.k];
        for (&l, s) in self.labels.iter().zip(scores) {
            sum[l] += s.as_f64();
        }
        let sizes = self.sizes();
        let mean: Vec<f64> = sum.iter().zip(&sizes).map(|(s, &c)| s / c as f64).collect();
        let mut order: Vec<usize> = (0..self.k).collect();
        order.sort_by(|&a, &b| mean[b].total_cmp(&mean[a]).then(a.cmp(&b)));
        let mut new_label = vec![0; self.k];
        for (rank, &old) in order.iter().enumerate() {
            new_label[old] = rank;
        }
        Ok(ClusterLabels {
            labels: self.labels.iter().map(|&l| new_label[l]).collect(),
            k: self.k,
        })
    }

    /// Relabels by decreasing cluster mean of each row's mean output, so
    /// cluster 0 is the one with the highest average output.
    pub fn ranked_by_mean_output<F: Scalar>(&self, outputs: ArrayView2<'_, F>) -> Result<ClusterLabels, ClusterError> {
        let p = F::of_usize(outputs.ncols().max(1));
        let scores: Vec<F> = outputs
            .rows()
            .into_iter()
            .map(|r| r.iter().fold(F::zero(), |s, &v| s + v) / p)
            .collect();
        self.ranked_by(&scores)
    }

    /// True when every cluster of `self` lies inside one cluster of `coarser`.
    pub fn refines(&self, coarser: &ClusterLabels) -> bool {
        if self.labels.len() != coarser.labels.len() {
            return false;
        }
        let mut parent = vec![usize::MAX; self.k];
        for (&fine, &coarse) in self.labels.iter().zip(&coarser.labels) {
            if parent[fine] == usize::MAX {
                parent[fine] = coarse;
            } else if parent[fine] != coarse {
                return false;
            }
        }
        true
    }
}
