use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::exact::coalition_value;
use super::{ShapConfig, ShapError, ShapMode};
use crate::Scalar;

/// Permutation-sampling estimate of the interventional Shapley values with
/// per-player standard errors.
///
/// Each permutation adds players one at a time and records the change in the
/// coalition value, averaged over the full background. Permutation `i` is
/// drawn from stream `i` of the seed, so results do not depend on the thread
/// count. The standard error is 0 with a single permutation. Uses the
/// `n_permutations` and `seed` of a sampled config; an exact config falls
/// back to 1000 permutations with seed 0.
pub fn shap_sampled<F, M>(model: &M, instance: &[F], cfg: &ShapConfig<F>) -> Result<(Vec<F>, Vec<F>), ShapError>
where
    F: Scalar,
    M: Fn(&[F]) -> F + Sync,
{
    let players = cfg.check(instance)?;
    let (n_perm, seed) = match cfg.mode {
        ShapMode::Sampled { n_permutations, seed } => (n_permutations, seed),
        ShapMode::Exact => (1000, 0),
    };
    if n_perm == 0 {
        return Err(ShapError::NoPermutations);
    }
    let m = players.len();
    let empty = coalition_value(model, instance, cfg, &players, 0);
    let draws: Vec<Vec<f64>> = (0..n_perm)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(&mut rng);
            let mut contrib = vec![0.0; m];
            let (mut mask, mut prev) = (0usize, empty);
            for j in order {
                mask |= 1 << j;
                let next = coalition_value(model, instance, cfg, &players, mask);
                contrib[j] = next - prev;
                prev = next;
            }
            contrib
        })
        .collect();

    let n = n_perm as f64;
    let mut phi = Vec::with_capacity(m);
    let mut se = Vec::with_capacity(m);
    for j in 0..m {
        let mean = draws.iter().map(|d| d[j]).sum::<f64>() / n;
        let var = if n_perm > 1 {
            draws.iter().map(|d| (d[j] - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        phi.push(F::of(mean));
        se.push(F::of((var / n).sqrt()));
    }
    Ok((phi, se))
}
