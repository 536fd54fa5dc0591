mod common;

use common::{random_matrix, rng, shapley_by_permutations, RandomModel};
use critproc::forest::{fit_forest, ForestParams, Targets, Task};
use critproc::shapley::{base_value, forest_shap, shap_exact, shap_sampled, ForestOutput, ShapConfig, ShapError};
use ndarray::{array, Array2};
use proptest::prelude::*;
use rand::Rng;

fn singletons(p: usize) -> Vec<Vec<usize>> {
    (0..p).map(|c| vec![c]).collect()
}

#[test]
fn exact_matches_permutation_definition() {
    for seed in 0..20 {
        let mut r = rng(seed);
        let p = r.random_range(1..=6);
        let model = RandomModel::new(&mut r, p, &[]);
        let m = r.random_range(1..6);
        let bg = random_matrix(&mut r, m, p);
        let x = random_matrix(&mut r, 1, p).row(0).to_vec();
        let f = |row: &[f64]| model.eval(row);
        let phi = shap_exact(&f, &x, &ShapConfig::exact(bg.clone())).unwrap();
        let oracle = shapley_by_permutations(&f, &x, &bg.view(), &singletons(p));
        for (a, b) in phi.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9, "seed {seed}: {phi:?} vs {oracle:?}");
        }
    }
}

#[test]
fn linear_model_closed_form() {
    let mut r = rng(5);
    let w = [1.5, -2.0, 0.25, 3.0];
    let bg = random_matrix(&mut r, 7, 4);
    let x = [0.5, 4.0, -3.0, 1.0];
    let f = |row: &[f64]| row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    let phi = shap_exact(&f, &x, &ShapConfig::exact(bg.clone())).unwrap();
    for d in 0..4 {
        let mean = bg.column(d).mean().unwrap();
        assert!((phi[d] - w[d] * (x[d] - mean)).abs() < 1e-9);
    }
}

#[test]
fn symmetric_features_share_credit() {
    let bg = array![[1.0, 1.0, 5.0], [3.0, 3.0, -2.0]];
    let f = |r: &[f64]| r[0] + r[1] + 0.1 * r[0] * r[1];
    let cfg = ShapConfig::exact(bg.clone());
    let phi = shap_exact(&f, &[4.0, 4.0, 0.0], &cfg).unwrap();
    assert!((phi[0] - phi[1]).abs() < 1e-12);
    assert_eq!(phi[2], 0.0);
    let (est, se) = shap_sampled(&f, &[4.0, 4.0, 0.0], &ShapConfig::sampled(bg, 2000, 1)).unwrap();
    assert!((est[0] - est[1]).abs() <= 4.0 * (se[0] + se[1]) + 1e-9);
}

#[test]
fn linearity() {
    let mut r = rng(8);
    let f = RandomModel::new(&mut r, 5, &[]);
    let g = RandomModel::new(&mut r, 5, &[]);
    let bg = random_matrix(&mut r, 4, 5);
    let x = random_matrix(&mut r, 1, 5).row(0).to_vec();
    let cfg = ShapConfig::exact(bg);
    let pf = shap_exact(&|v: &[f64]| f.eval(v), &x, &cfg).unwrap();
    let pg = shap_exact(&|v: &[f64]| g.eval(v), &x, &cfg).unwrap();
    let psum = shap_exact(&|v: &[f64]| f.eval(v) + g.eval(v), &x, &cfg).unwrap();
    for d in 0..5 {
        assert!((psum[d] - pf[d] - pg[d]).abs() < 1e-9);
    }
}

#[test]
fn grouped_columns_act_as_one_feature() {
    // columns: a, onehot(A), onehot(B); collapsed form: a, t in {0, 1, 2}
    let f = |r: &[f64]| r[0] * (1.0 + 2.0 * r[1]) - 3.0 * r[2];
    let collapsed = |r: &[f64]| f(&[r[0], (r[1] == 1.0) as u8 as f64, (r[1] == 2.0) as u8 as f64]);
    let bg = array![[1.0, 1.0, 0.0], [2.0, 0.0, 1.0], [-1.0, 0.0, 0.0]];
    let bg_collapsed = array![[1.0, 1.0], [2.0, 2.0], [-1.0, 0.0]];
    let x = [0.5, 0.0, 1.0];
    let grouped = ShapConfig::exact(bg).with_groups(vec![vec![0], vec![1, 2]]);
    let phi = shap_exact(&f, &x, &grouped).unwrap();
    let reference = shap_exact(&collapsed, &[0.5, 2.0], &ShapConfig::exact(bg_collapsed)).unwrap();
    assert_eq!(phi.len(), 2);
    for (a, b) in phi.iter().zip(&reference) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn sampled_is_deterministic_and_thread_independent() {
    let mut r = rng(3);
    let model = RandomModel::new(&mut r, 6, &[]);
    let bg = random_matrix(&mut r, 5, 6);
    let x = random_matrix(&mut r, 1, 6).row(0).to_vec();
    let f = |v: &[f64]| model.eval(v);
    let cfg = ShapConfig::sampled(bg.clone(), 1, 42);
    assert_eq!(shap_sampled(&f, &x, &cfg).unwrap(), shap_sampled(&f, &x, &cfg).unwrap());
    let cfg = ShapConfig::sampled(bg, 300, 42);
    let reference = shap_sampled(&f, &x, &cfg).unwrap();
    for threads in [1, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        assert_eq!(pool.install(|| shap_sampled(&f, &x, &cfg).unwrap()), reference);
    }
}

#[test]
fn forest_route_matches_enumeration() {
    for (seed, task) in [(1, Task::Regress), (2, Task::Classify), (3, Task::Regress)] {
        let mut r = rng(seed);
        let x = random_matrix(&mut r, 120, 5);
        let params = ForestParams {
            tree_count: 15,
            seed,
            max_depth: Some(5),
            ..ForestParams::single_tree(task, None)
        };
        let y_reg: Vec<f64> = x.rows().into_iter().map(|row| row[0] * row[1] + row[2]).collect();
        let y_cls: Vec<usize> = y_reg
            .iter()
            .map(|v| (*v > 0.0) as usize + (*v > 20.0) as usize)
            .collect();
        let (forest, output) = match task {
            Task::Regress => (
                fit_forest(x.view(), Targets::Values(&y_reg), &params, &[]).unwrap(),
                ForestOutput::Value,
            ),
            Task::Classify => (
                fit_forest(x.view(), Targets::classes(&y_cls), &params, &[]).unwrap(),
                ForestOutput::Proba(1),
            ),
        };
        let model = |row: &[f64]| match output {
            ForestOutput::Value => forest.predict_row(row).unwrap(),
            ForestOutput::Proba(c) => forest.proba_row(row).unwrap()[c],
        };
        let bg = random_matrix(&mut r, 8, 5);
        for groups in [singletons(5), vec![vec![0, 3], vec![1], vec![2, 4]]] {
            let cfg = ShapConfig::exact(bg.clone()).with_groups(groups);
            for i in 0..4 {
                let inst = x.row(i).to_vec();
                let fast = forest_shap(&forest, output, &inst, &cfg).unwrap();
                let slow = shap_exact(&model, &inst, &cfg).unwrap();
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).abs() < 1e-9, "seed {seed}: {fast:?} vs {slow:?}");
                }
            }
        }
    }
}

#[test]
fn stump_credits_only_its_feature() {
    let x = Array2::from_shape_fn((40, 3), |(i, j)| ((i * 7 + j * 13) % 40) as f64);
    let y: Vec<f64> = x.column(0).iter().map(|&v| if v < 20.0 { 1.0 } else { 5.0 }).collect();
    let params = ForestParams::single_tree(Task::Regress, Some(1));
    let forest = fit_forest(x.view(), Targets::Values(&y), &params, &[]).unwrap();
    let cfg = ShapConfig::exact(x.clone());
    let model = |r: &[f64]| forest.predict_row(r).unwrap();
    let phi = shap_exact(&model, &[30.0, 1.0, 2.0], &cfg).unwrap();
    assert!(phi[0] > 0.0);
    assert_eq!((phi[1], phi[2]), (0.0, 0.0));
}

#[test]
fn mismatched_inputs_rejected() {
    let cfg = ShapConfig::exact(array![[0.0, 1.0]]);
    let f = |r: &[f64]| r[0];
    assert!(matches!(
        shap_exact(&f, &[1.0], &cfg),
        Err(ShapError::DimensionMismatch { .. })
    ));
    let empty = ShapConfig::exact(Array2::<f64>::zeros((0, 2)));
    assert_eq!(
        shap_exact(&f, &[1.0, 2.0], &empty).unwrap_err(),
        ShapError::EmptyBackground
    );
}

#[test]
fn single_precision() {
    let bg = array![[0.0f32, 1.0], [2.0, -1.0]];
    let f = |r: &[f32]| 2.0 * r[0] + r[0] * r[1];
    let phi = shap_exact(&f, &[1.0, 3.0], &ShapConfig::exact(bg.clone())).unwrap();
    let base = base_value(&f, bg.view());
    assert!((base + phi[0] + phi[1] - f(&[1.0, 3.0])).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn efficiency_and_dummy(seed in 0u64..10_000, p in 2usize..8, m in 1usize..6) {
        let mut r = rng(seed);
        let dummy = r.random_range(0..p);
        let model = RandomModel::new(&mut r, p, &[dummy]);
        let bg = random_matrix(&mut r, m, p);
        let x = random_matrix(&mut r, 1, p).row(0).to_vec();
        let f = |v: &[f64]| model.eval(v);
        let phi = shap_exact(&f, &x, &ShapConfig::exact(bg.clone())).unwrap();
        let total = base_value(&f, bg.view()) + phi.iter().sum::<f64>();
        prop_assert!((total - f(&x)).abs() <= 1e-9);
        prop_assert!(phi[dummy].abs() <= 1e-12);
    }

    #[test]
    fn sampled_satisfies_efficiency(seed in 0u64..10_000, p in 2usize..8) {
        let mut r = rng(seed);
        let model = RandomModel::new(&mut r, p, &[]);
        let bg = random_matrix(&mut r, 3, p);
        let x = random_matrix(&mut r, 1, p).row(0).to_vec();
        let f = |v: &[f64]| model.eval(v);
        let (phi, _) = shap_sampled(&f, &x, &ShapConfig::sampled(bg.clone(), 20, seed)).unwrap();
        let total = base_value(&f, bg.view()) + phi.iter().sum::<f64>();
        prop_assert!((total - f(&x)).abs() <= 1e-9);
    }
}
