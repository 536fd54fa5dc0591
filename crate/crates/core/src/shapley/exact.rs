use rayon::prelude::*;

use super::{coalition_weights, ShapConfig, ShapError, MAX_EXACT_FEATURES};
use crate::Scalar;

/// Exact interventional Shapley values by enumerating all `2^M` coalitions of
/// the `M` players. Costs `2^M * m` model calls for `m` background rows.
pub fn shap_exact<F, M>(model: &M, instance: &[F], cfg: &ShapConfig<F>) -> Result<Vec<F>, ShapError>
where
    F: Scalar,
    M: Fn(&[F]) -> F + Sync,
{
    let players = cfg.check(instance)?;
    let m = players.len();
    if m > MAX_EXACT_FEATURES {
        return Err(ShapError::TooManyFeatures {
            m,
            max: MAX_EXACT_FEATURES,
        });
    }
    let values: Vec<f64> = (0..1usize << m)
        .into_par_iter()
        .map(|mask| coalition_value(model, instance, cfg, &players, mask))
        .collect();
    let weights = coalition_weights(m);
    let phi = (0..m)
        .map(|j| {
            let bit = 1usize << j;
            let total: f64 = (0..1usize << m)
                .filter(|s| s & bit == 0)
                .map(|s| weights[s.count_ones() as usize] * (values[s | bit] - values[s]))
                .sum();
            F::of(total)
        })
        .collect();
    Ok(phi)
}

/// Mean output over the background with the players in `mask` taken from `instance`.
pub(crate) fn coalition_value<F, M>(
    model: &M,
    instance: &[F],
    cfg: &ShapConfig<F>,
    players: &[Vec<usize>],
    mask: usize,
) -> f64
where
    F: Scalar,
    M: Fn(&[F]) -> F,
{
    let mut row = vec![F::zero(); instance.len()];
    let mut total = 0.0;
    for b in cfg.background.rows() {
        row.iter_mut().zip(b).for_each(|(r, v)| *r = *v);
        for (j, cols) in players.iter().enumerate() {
            if mask >> j & 1 == 1 {
                for &c in cols {
                    row[c] = instance[c];
                }
            }
        }
        total += model(&row).as_f64();
    }
    total / cfg.background.nrows() as f64
}
