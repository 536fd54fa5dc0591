//! Independent reference implementations used only by tests.
#![allow(dead_code)]

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |_| rng.random_range(-10.0..10.0))
}

fn sse(x: &ArrayView2<'_, f64>, members: &[usize]) -> f64 {
    let p = x.ncols();
    let mut centroid = vec![0.0; p];
    for &i in members {
        for d in 0..p {
            centroid[d] += x[[i, d]];
        }
    }
    for c in &mut centroid {
        *c /= members.len() as f64;
    }
    members
        .iter()
        .map(|&i| (0..p).map(|d| (x[[i, d]] - centroid[d]).powi(2)).sum::<f64>())
        .sum()
}

/// Greedy agglomeration that recomputes, for every candidate pair, the
/// increase in total within-cluster sum of squares from the raw points.
/// Returns `(left id, right id, height)` per merge with `height = sqrt(2·ΔSSE)`.
pub fn brute_force_ward(x: ArrayView2<'_, f64>) -> Vec<(usize, usize, f64)> {
    let n = x.nrows();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut out = Vec::new();
    let mut next_id = n;
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut union = clusters[a].1.clone();
                union.extend(&clusters[b].1);
                let delta = sse(&x, &union) - sse(&x, &clusters[a].1) - sse(&x, &clusters[b].1);
                let lo = clusters[a].0.min(clusters[b].0);
                let hi = clusters[a].0.max(clusters[b].0);
                let better = match best {
                    None => true,
                    Some((d, l, h, _, _)) => (delta, lo, hi) < (d, l, h),
                };
                if better {
                    best = Some((delta, lo, hi, a, b));
                }
            }
        }
        let (delta, lo, hi, a, b) = best.unwrap();
        let mut members = clusters[a].1.clone();
        members.extend(&clusters[b].1);
        clusters.remove(b);
        clusters.remove(a);
        clusters.push((next_id, members));
        next_id += 1;
        out.push((lo, hi, (2.0 * delta.max(0.0)).sqrt()));
    }
    out
}

/// Partition as a sorted set of sorted member lists.
pub fn as_sets(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sets = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        sets[l].push(i);
    }
    sets.retain(|s| !s.is_empty());
    sets.sort();
    sets
}

/// Shapley values from the permutation definition: the average marginal
/// contribution of each player over all `M!` orderings.
pub fn shapley_by_permutations(
    model: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    background: &ArrayView2<'_, f64>,
    groups: &[Vec<usize>],
) -> Vec<f64> {
    let m = groups.len();
    let value = |present: &[bool]| -> f64 {
        let mut total = 0.0;
        for b in background.rows() {
            let mut row = b.to_vec();
            for (j, cols) in groups.iter().enumerate() {
                if present[j] {
                    for &c in cols {
                        row[c] = x[c];
                    }
                }
            }
            total += model(&row);
        }
        total / background.nrows() as f64
    };
    let mut phi = vec![0.0; m];
    let mut count = 0usize;
    let mut order: Vec<usize> = (0..m).collect();
    permute(&mut order, 0, &mut |perm| {
        let mut present = vec![false; m];
        let mut prev = value(&present);
        for &j in perm {
            present[j] = true;
            let next = value(&present);
            phi[j] += next - prev;
            prev = next;
        }
        count += 1;
    });
    phi.iter().map(|v| v / count as f64).collect()
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Random smooth model with pairwise interactions and a step term. Features
/// listed in `dummies` never influence the output.
#[derive(Clone, Debug)]
pub struct RandomModel {
    pub linear: Vec<f64>,
    pub pairs: Vec<(usize, usize, f64)>,
    pub step: (usize, f64, f64),
}

impl RandomModel {
    pub fn new(rng: &mut ChaCha8Rng, p: usize, dummies: &[usize]) -> Self {
        let live: Vec<usize> = (0..p).filter(|d| !dummies.contains(d)).collect();
        let linear = (0..p)
            .map(|d| {
                if dummies.contains(&d) {
                    0.0
                } else {
                    rng.random_range(-2.0..2.0)
                }
            })
            .collect();
        let pairs = (0..3)
            .map(|_| {
                let a = live[rng.random_range(0..live.len())];
                let b = live[rng.random_range(0..live.len())];
                (a, b, rng.random_range(-0.5..0.5))
            })
            .collect();
        let step = (
            live[rng.random_range(0..live.len())],
            rng.random_range(-5.0..5.0),
            rng.random_range(-3.0..3.0),
        );
        RandomModel { linear, pairs, step }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.linear.iter().zip(x).map(|(w, v)| w * v).sum();
        let inter: f64 = self.pairs.iter().map(|&(a, b, w)| w * x[a] * x[b]).sum();
        let (d, t, h) = self.step;
        lin + inter + if x[d] > t { h } else { 0.0 }
    }
}
