use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ForestError, ForestParams, Targets, Task};
use crate::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafValue<F> {
    /// Class frequencies of the training samples in the leaf; sums to 1.
    Classes(Vec<F>),
    Mean(F),
}

/// Flattened tree node. Splits send `x[feature] <= threshold` left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node<F> {
    Split {
        feature: usize,
        threshold: F,
        left: usize,
        right: usize,
        samples: usize,
    },
    Leaf {
        value: LeafValue<F>,
        samples: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree<F> {
    nodes: Vec<Node<F>>,
    n_features: usize,
}

impl<F: Scalar> Tree<F> {
    pub fn nodes(&self) -> &[Node<F>] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn leaf(&self, row: &[F]) -> &LeafValue<F> {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { value, .. } => return value,
            }
        }
    }

    /// Regression mean, or the most frequent class (lowest id on ties) as `F`.
    pub fn predict_row(&self, row: &[F]) -> F {
        match self.leaf(row) {
            LeafValue::Mean(m) => *m,
            LeafValue::Classes(p) => F::of_usize(argmax(p)),
        }
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk<F>(nodes: &[Node<F>], i: usize) -> usize {
            match &nodes[i] {
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = (&LeafValue<F>, usize)> {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value, samples } => Some((value, *samples)),
            _ => None,
        })
    }
}

pub(crate) fn argmax<F: Scalar>(p: &[F]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

struct Builder<'a, F> {
    x: ArrayView2<'a, F>,
    targets: Targets<'a, F>,
    max_depth: usize,
    min_leaf: usize,
    mtry: usize,
    nodes: Vec<Node<F>>,
    rng: &'a mut ChaCha8Rng,
}

#[derive(Clone, Copy)]
struct SplitChoice<F> {
    gain: f64,
    feature: usize,
    threshold: F,
}

impl<F: Scalar> SplitChoice<F> {
    /// Higher gain wins; then lower feature index, then lower threshold.
    fn beats(&self, other: &Option<SplitChoice<F>>) -> bool {
        match other {
            None => true,
            Some(o) => {
                self.gain > o.gain
                    || (self.gain == o.gain
                        && (self.feature < o.feature || (self.feature == o.feature && self.threshold < o.threshold)))
            }
        }
    }
}

impl<F: Scalar> Builder<'_, F> {
    fn leaf_value(&self, samples: &[usize]) -> LeafValue<F> {
        match self.targets {
            Targets::Classes { labels, n_classes } => {
                let mut counts = vec![0usize; n_classes];
                for &s in samples {
                    counts[labels[s]] += 1;
                }
                let n = samples.len() as f64;
                LeafValue::Classes(counts.iter().map(|&c| F::of(c as f64 / n)).collect())
            }
            Targets::Values(y) => {
                let sum: f64 = samples.iter().map(|&s| y[s].as_f64()).sum();
                LeafValue::Mean(F::of(sum / samples.len() as f64))
            }
        }
    }

    fn is_pure(&self, samples: &[usize]) -> bool {
        match self.targets {
            Targets::Classes { labels, .. } => samples.iter().all(|&s| labels[s] == labels[samples[0]]),
            Targets::Values(y) => samples.iter().all(|&s| y[s] == y[samples[0]]),
        }
    }

    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        let n = samples.len();
        if depth >= self.max_depth || n < 2 * self.min_leaf || self.is_pure(&samples) {
            self.nodes.push(Node::Leaf {
                value: self.leaf_value(&samples),
                samples: n,
            });
            return id;
        }
        let Some(split) = self.best_split(&samples) else {
            self.nodes.push(Node::Leaf {
                value: self.leaf_value(&samples),
                samples: n,
            });
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&s| self.x[[s, split.feature]] <= split.threshold);
        // Placeholder; children indices patched after they are grown.
        self.nodes.push(Node::Leaf {
            value: LeafValue::Mean(F::zero()),
            samples: n,
        });
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: l,
            right: r,
            samples: n,
        };
        id
    }

    /// Searches a random subset of `mtry` features; if none of them admits a
    /// valid split, keeps drawing the remaining features until one does.
    fn best_split(&mut self, samples: &[usize]) -> Option<SplitChoice<F>> {
        let p = self.x.ncols();
        let mut order: Vec<usize> = (0..p).collect();
        order.shuffle(self.rng);
        let mut best = None;
        let mut scratch: Vec<(F, usize)> = Vec::with_capacity(samples.len());
        for (visited, &f) in order.iter().enumerate() {
            if visited >= self.mtry && best.is_some() {
                break;
            }
            if let Some(c) = self.best_threshold(samples, f, &mut scratch) {
                if c.beats(&best) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn best_threshold(&self, samples: &[usize], f: usize, sorted: &mut Vec<(F, usize)>) -> Option<SplitChoice<F>> {
        sorted.clear();
        sorted.extend(samples.iter().map(|&s| (self.x[[s, f]], s)));
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features").then(a.1.cmp(&b.1)));
        let n = sorted.len();
        if sorted[0].0 == sorted[n - 1].0 {
            return None;
        }
        let mut best: Option<SplitChoice<F>> = None;
        let mut consider = |i: usize, score: f64| {
            let (lo, hi) = (sorted[i].0, sorted[i + 1].0);
            let mut t = (lo + hi) / F::of(2.0);
            if t >= hi {
                t = lo;
            }
            let c = SplitChoice {
                gain: score,
                feature: f,
                threshold: t,
            };
            if c.beats(&best) {
                best = Some(c);
            }
        };
        let valid = |i: usize| {
            let left = i + 1;
            sorted[i].0 < sorted[i + 1].0 && left >= self.min_leaf && n - left >= self.min_leaf
        };
        match self.targets {
            Targets::Classes { labels, n_classes } => {
                let mut total = vec![0f64; n_classes];
                for &(_, s) in sorted.iter() {
                    total[labels[s]] += 1.0;
                }
                let parent: f64 = total.iter().map(|c| c * c).sum::<f64>() / n as f64;
                let mut left = vec![0f64; n_classes];
                for i in 0..n - 1 {
                    left[labels[sorted[i].1]] += 1.0;
                    if !valid(i) {
                        continue;
                    }
                    let nl = (i + 1) as f64;
                    let nr = (n - i - 1) as f64;
                    let (mut sl, mut sr) = (0.0, 0.0);
                    for c in 0..n_classes {
                        sl += left[c] * left[c];
                        let r = total[c] - left[c];
                        sr += r * r;
                    }
                    // Weighted Gini decrease times n.
                    consider(i, sl / nl + sr / nr - parent);
                }
            }
            Targets::Values(y) => {
                let total: f64 = sorted.iter().map(|&(_, s)| y[s].as_f64()).sum();
                let parent = total * total / n as f64;
                let mut left = 0.0;
                for i in 0..n - 1 {
                    left += y[sorted[i].1].as_f64();
                    if !valid(i) {
                        continue;
                    }
                    let nl = (i + 1) as f64;
                    let nr = (n - i - 1) as f64;
                    let right = total - left;
                    // Reduction of the sum of squared errors.
                    consider(i, left * left / nl + right * right / nr - parent);
                }
            }
        }
        best
    }
}

pub(crate) fn check_inputs<F: Scalar>(x: &ArrayView2<'_, F>, targets: &Targets<'_, F>) -> Result<(), ForestError> {
    if x.nrows() == 0 || targets.is_empty() {
        return Err(ForestError::EmptyData);
    }
    if targets.len() != x.nrows() {
        return Err(ForestError::LengthMismatch {
            expected: x.nrows(),
            actual: targets.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ForestError::NonFiniteInput);
    }
    match targets {
        Targets::Classes { labels, n_classes } => {
            if let Some(&label) = labels.iter().find(|&&l| l >= *n_classes) {
                return Err(ForestError::LabelOutOfRange {
                    label,
                    n_classes: *n_classes,
                });
            }
        }
        Targets::Values(y) => {
            if y.iter().any(|v| !v.is_finite()) {
                return Err(ForestError::NonFiniteInput);
            }
        }
    }
    Ok(())
}

/// Grows one CART tree on the rows listed in `samples` (repeats allowed).
pub(crate) fn grow_tree<F: Scalar>(
    x: ArrayView2<'_, F>,
    targets: Targets<'_, F>,
    params: &ForestParams,
    samples: Vec<usize>,
    rng: &mut ChaCha8Rng,
) -> Tree<F> {
    let p = x.ncols();
    let mut b = Builder {
        x,
        targets,
        max_depth: params.max_depth.unwrap_or(usize::MAX),
        min_leaf: params.min_samples_leaf,
        mtry: params.effective_features_per_split().resolve(p),
        nodes: Vec::new(),
        rng,
    };
    b.grow(samples, 0);
    Tree {
        nodes: b.nodes,
        n_features: p,
    }
}

/// Fits a single tree on all rows (no bootstrap) with the node-level feature
/// sampling of `params`.
pub fn fit_tree<F: Scalar>(
    x: ArrayView2<'_, F>,
    targets: Targets<'_, F>,
    params: &ForestParams,
    rng: &mut ChaCha8Rng,
) -> Result<Tree<F>, ForestError> {
    params.validate()?;
    check_inputs(&x, &targets)?;
    if targets.task() != params.task {
        return Err(ForestError::WrongTask(match params.task {
            Task::Classify => "classification",
            Task::Regress => "regression",
        }));
    }
    Ok(grow_tree(x, targets, params, (0..x.nrows()).collect(), rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use rand::SeedableRng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn constant_target_is_single_leaf() {
        let x = array![[1.0], [2.0], [3.0]];
        let y = [4.5, 4.5, 4.5];
        let p = ForestParams::single_tree(Task::Regress, Some(6));
        let t = fit_tree(x.view(), Targets::Values(&y), &p, &mut rng()).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.predict_row(&[100.0]), 4.5);
    }

    #[test]
    fn stump_threshold_matches_exhaustive_gini_search() {
        let x = array![[1.0], [2.0], [3.0], [4.0]];
        let labels = [0, 0, 1, 1];
        // Oracle: weighted Gini of every midpoint split.
        let gini = |ys: &[usize]| {
            let n = ys.len() as f64;
            let p1 = ys.iter().filter(|&&v| v == 1).count() as f64 / n;
            1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)
        };
        let mut best = (f64::INFINITY, 0.0);
        for cut in 1..4 {
            let (l, r) = labels.split_at(cut);
            let w = (l.len() as f64 * gini(l) + r.len() as f64 * gini(r)) / 4.0;
            let t = (x[[cut - 1, 0]] + x[[cut, 0]]) / 2.0;
            if w < best.0 {
                best = (w, t);
            }
        }
        assert_eq!(best.1, 2.5);

        let p = ForestParams::single_tree(Task::Classify, Some(1));
        let t = fit_tree(x.view(), Targets::classes(&labels), &p, &mut rng()).unwrap();
        match &t.nodes()[0] {
            Node::Split { feature, threshold, .. } => assert_eq!((*feature, *threshold), (0, best.1)),
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(t.predict_row(&[1.5]), 0.0);
        assert_eq!(t.predict_row(&[3.5]), 1.0);
    }

    #[test]
    fn single_row_is_leaf() {
        let x = array![[7.0, 8.0]];
        let p = ForestParams::single_tree(Task::Classify, None);
        let t = fit_tree(x.view(), Targets::classes(&[0]), &p, &mut rng()).unwrap();
        assert_eq!(t.nodes().len(), 1);
    }

    #[test]
    fn xor_needs_zero_gain_split() {
        let x = array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        let labels = [0, 1, 1, 0];
        let p = ForestParams::single_tree(Task::Classify, None);
        let t = fit_tree(x.view(), Targets::classes(&labels), &p, &mut rng()).unwrap();
        for (i, row) in x.rows().into_iter().enumerate() {
            assert_eq!(t.predict_row(row.as_slice().unwrap()), labels[i] as f64);
        }
    }

    #[test]
    fn errors() {
        let p = ForestParams::single_tree(Task::Classify, None);
        let empty = Array2::<f64>::zeros((0, 2));
        assert!(matches!(
            fit_tree(empty.view(), Targets::classes(&[]), &p, &mut rng()),
            Err(ForestError::EmptyData)
        ));
        let x = array![[1.0], [2.0]];
        assert!(matches!(
            fit_tree(
                x.view(),
                Targets::Classes {
                    labels: &[0, 3],
                    n_classes: 2
                },
                &p,
                &mut rng()
            ),
            Err(ForestError::LabelOutOfRange { label: 3, .. })
        ));
        assert!(matches!(
            fit_tree(x.view(), Targets::Values(&[1.0, 2.0]), &p, &mut rng()),
            Err(ForestError::WrongTask(_))
        ));
    }

    #[test]
    fn min_leaf_respected() {
        let x = Array2::from_shape_fn((30, 2), |(i, j)| ((i * 7 + j * 3) % 11) as f64);
        let y: Vec<f64> = (0..30).map(|i| (i % 5) as f64).collect();
        let mut p = ForestParams::single_tree(Task::Regress, None);
        p.min_samples_leaf = 4;
        let t = fit_tree(x.view(), Targets::Values(&y), &p, &mut rng()).unwrap();
        assert!(t.leaves().all(|(_, n)| n >= 4));
    }
}
