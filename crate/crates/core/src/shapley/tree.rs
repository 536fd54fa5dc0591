use rayon::prelude::*;

use super::{ShapConfig, ShapError};
use crate::forest::{Forest, LeafValue, Node, Tree};
use crate::Scalar;

/// Which forest output is explained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForestOutput {
    /// Regression prediction.
    Value,
    /// Predicted probability of one class.
    Proba(usize),
}

/// Exact interventional Shapley values of a forest output, computed from the
/// tree structure instead of coalition enumeration.
///
/// For one tree and one background row `b`, a leaf is reached by the hybrid
/// row `(x on S, b elsewhere)` exactly when `S` contains the players `P` whose
/// splits on the path follow `x` against `b`, and excludes the players `N`
/// whose splits follow `b` against `x`. That indicator game has closed-form
/// Shapley values, so the attribution is a sum over reachable leaves. The
/// result equals [`super::shap_exact`] on the same output and ignores the
/// config's mode and player cap.
pub fn forest_shap<F: Scalar>(
    forest: &Forest<F>,
    output: ForestOutput,
    instance: &[F],
    cfg: &ShapConfig<F>,
) -> Result<Vec<F>, ShapError> {
    let players = cfg.check(instance)?;
    if instance.len() != forest.n_features() {
        return Err(ShapError::DimensionMismatch {
            expected: forest.n_features(),
            actual: instance.len(),
        });
    }
    match (output, forest.n_classes()) {
        (ForestOutput::Value, None) => {}
        (ForestOutput::Proba(c), Some(k)) if c < k => {}
        _ => return Err(ShapError::Model(format!("output {output:?} does not match the forest"))),
    }
    let m = players.len();
    let mut player_of = vec![0; instance.len()];
    for (j, cols) in players.iter().enumerate() {
        for &c in cols {
            player_of[c] = j;
        }
    }
    let fact: Vec<f64> = (0..=m)
        .scan(1.0, |acc, i| {
            if i > 0 {
                *acc *= i as f64;
            }
            Some(*acc)
        })
        .collect();

    let per_row: Vec<Vec<f64>> = cfg
        .background
        .rows()
        .into_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|b| {
            let b = b.to_vec();
            let mut walker = Walker {
                x: instance,
                b: &b,
                player_of: &player_of,
                fact: &fact,
                output,
                state: vec![Side::Free; m],
                on_x: Vec::new(),
                on_b: Vec::new(),
                phi: vec![0.0; m],
            };
            for tree in &forest.trees {
                walker.walk(tree, 0);
            }
            walker.phi
        })
        .collect();

    let scale = (forest.trees.len() * cfg.background.nrows()) as f64;
    Ok((0..m)
        .map(|j| F::of(per_row.iter().map(|r| r[j]).sum::<f64>() / scale))
        .collect())
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Free,
    X,
    B,
}

struct Walker<'a, F> {
    x: &'a [F],
    b: &'a [F],
    player_of: &'a [usize],
    fact: &'a [f64],
    output: ForestOutput,
    state: Vec<Side>,
    on_x: Vec<usize>,
    on_b: Vec<usize>,
    phi: Vec<f64>,
}

impl<F: Scalar> Walker<'_, F> {
    fn walk(&mut self, tree: &Tree<F>, node: usize) {
        match &tree.nodes()[node] {
            Node::Leaf { value, .. } => {
                let v = match (value, self.output) {
                    (LeafValue::Mean(m), _) => m.as_f64(),
                    (LeafValue::Classes(p), ForestOutput::Proba(c)) => p[c].as_f64(),
                    (LeafValue::Classes(_), ForestOutput::Value) => unreachable!("checked by caller"),
                };
                self.credit(v);
            }
            Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => {
                let go = |row: &[F]| if row[*feature] <= *threshold { *left } else { *right };
                let (nx, nb) = (go(self.x), go(self.b));
                let j = self.player_of[*feature];
                match self.state[j] {
                    Side::X => self.walk(tree, nx),
                    Side::B => self.walk(tree, nb),
                    Side::Free if nx == nb => self.walk(tree, nx),
                    Side::Free => {
                        self.state[j] = Side::X;
                        self.on_x.push(j);
                        self.walk(tree, nx);
                        self.on_x.pop();
                        self.state[j] = Side::B;
                        self.on_b.push(j);
                        self.walk(tree, nb);
                        self.on_b.pop();
                        self.state[j] = Side::Free;
                    }
                }
            }
        }
    }

    fn credit(&mut self, v: f64) {
        let (p, n) = (self.on_x.len(), self.on_b.len());
        if p > 0 {
            let w = self.fact[p - 1] * self.fact[n] / self.fact[p + n];
            for &j in &self.on_x {
                self.phi[j] += v * w;
            }
        }
        if n > 0 {
            let w = self.fact[p] * self.fact[n - 1] / self.fact[p + n];
            for &j in &self.on_b {
                self.phi[j] -= v * w;
            }
        }
    }
}
