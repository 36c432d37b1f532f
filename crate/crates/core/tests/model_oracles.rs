//! Learner verification: exhaustive split enumeration, hand-derived boosting
//! rounds, lossless binning, and finite-difference gradient checks.

use pyrocast_core::gbdt::{fit_gbdt, GbdtConfig, Growth};
use pyrocast_core::linear::binary_loss_grad;
use pyrocast_core::mlp::{fit_mlp, Activation, MlpConfig};
use pyrocast_core::model::{fit_model, ModelConfig};
use pyrocast_core::reference;
use pyrocast_core::tree::{fit_tree, TreeConfig, TreeNode};
use pyrocast_core::Matrix;
use rand::Rng;

fn random_classification(seed: u64, n: usize, d: usize, k: usize) -> (Matrix, Vec<usize>) {
    let mut rng = pyrocast_core::seeding::rng(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-3.0..3.0)).collect())
        .collect();
    let x = Matrix::from_rows(&rows);
    // labels loosely tied to the first feature so splits are non-trivial
    let y: Vec<usize> = (0..n)
        .map(|i| {
            let noisy = x.get(i, 0) + rng.gen_range(-1.5..1.5);
            ((noisy + 3.0) / 6.0 * k as f64).clamp(0.0, k as f64 - 1.0) as usize
        })
        .collect();
    (x, y)
}

#[test]
fn root_split_matches_exhaustive_enumeration() {
    for seed in 0..25u64 {
        let k = 2 + (seed as usize) % 2;
        let (x, y) = random_classification(seed, 20 + (seed as usize * 9) % 180, 3, k);
        if y.iter().all(|&c| c == y[0]) {
            continue;
        }
        let cfg = TreeConfig {
            max_depth: 1,
            min_samples_leaf: 1,
            ..Default::default()
        };
        let tree = fit_tree(&x, &y, k, &cfg).unwrap();
        let oracle = reference::best_gini_split_enumeration(&x, &y, k);
        match (&tree.root, oracle) {
            (TreeNode::Split { feature, threshold, .. }, Some((_, of, ot))) => {
                assert_eq!((*feature, *threshold), (of, ot), "seed {seed}");
            }
            (TreeNode::Leaf { .. }, None) => {}
            (got, want) => panic!("seed {seed}: tree {got:?} vs oracle {want:?}"),
        }
    }
}

#[test]
fn two_round_stump_boosting_matches_hand_derivation() {
    // 8 samples, 2 features, all values distinct so binning is lossless
    let x = Matrix::from_rows(&[
        vec![0.5, 7.0],
        vec![1.5, 3.0],
        vec![2.5, 9.0],
        vec![3.5, 1.0],
        vec![4.5, 8.0],
        vec![5.5, 2.0],
        vec![6.5, 6.0],
        vec![7.5, 4.0],
    ]);
    let y = vec![0, 0, 0, 1, 0, 1, 1, 1];
    let cfg = GbdtConfig {
        growth: Growth::DepthWise,
        n_estimators: 2,
        learning_rate: 0.1,
        max_depth: 1,
        l2_lambda: 1.0,
        ..Default::default()
    };
    let model = fit_gbdt(&x, &y, 2, &cfg, None).unwrap();
    let y01: Vec<f64> = y.iter().map(|&c| c as f64).collect();
    let oracle = reference::exact_gbdt_scores(&x, &y01, 2, 1, 0.1, 1.0);
    let final_scores = &oracle[1];
    for i in 0..x.n_rows() {
        let got = model.boosters[0].raw_score(x.row(i));
        assert!(
            (got - final_scores[i]).abs() <= 1e-9,
            "row {i}: {got} vs {}",
            final_scores[i]
        );
    }
}

#[test]
fn histogram_gbdt_is_lossless_below_bin_count() {
    for seed in [3u64, 17, 40] {
        let mut rng = pyrocast_core::seeding::rng(seed);
        // every feature takes few distinct values, far under 255 bins
        let rows: Vec<Vec<f64>> = (0..120)
            .map(|_| {
                vec![
                    rng.gen_range(0..12) as f64,
                    rng.gen_range(0..30) as f64 / 4.0,
                    rng.gen_range(0..5) as f64 * 3.0,
                ]
            })
            .collect();
        let x = Matrix::from_rows(&rows);
        let y: Vec<usize> = (0..120)
            .map(|i| usize::from(x.get(i, 0) + x.get(i, 1) + rng.gen_range(-2.0..2.0) > 7.0))
            .collect();
        if y.iter().all(|&c| c == y[0]) {
            continue;
        }
        let cfg = GbdtConfig {
            growth: Growth::DepthWise,
            n_estimators: 5,
            learning_rate: 0.2,
            max_depth: 3,
            l2_lambda: 1.0,
            n_bins: 255,
            ..Default::default()
        };
        let model = fit_gbdt(&x, &y, 2, &cfg, None).unwrap();
        let y01: Vec<f64> = y.iter().map(|&c| c as f64).collect();
        let oracle = reference::exact_gbdt_scores(&x, &y01, 5, 3, 0.2, 1.0);
        let last = oracle.last().unwrap();
        for i in 0..x.n_rows() {
            let got = model.boosters[0].raw_score(x.row(i));
            assert!(
                (got - last[i]).abs() <= 1e-9,
                "seed {seed} row {i}: {got} vs {}",
                last[i]
            );
        }
    }
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let (x, y) = random_classification(8, 12, 3, 2);
    let y01: Vec<f64> = y.iter().map(|&c| c as f64).collect();
    let mut rng = pyrocast_core::seeding::rng(9);
    let params: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.8..0.8)).collect();
    let l2 = 0.05;
    let (_, grad) = binary_loss_grad(&x, &y01, &params, l2);
    let eps = 1e-6;
    for j in 0..params.len() {
        let mut plus = params.clone();
        plus[j] += eps;
        let mut minus = params.clone();
        minus[j] -= eps;
        let fd = (binary_loss_grad(&x, &y01, &plus, l2).0
            - binary_loss_grad(&x, &y01, &minus, l2).0)
            / (2.0 * eps);
        let rel = (grad[j] - fd).abs() / fd.abs().max(1.0);
        assert!(rel <= 1e-6, "param {j}: analytic {} vs fd {fd}", grad[j]);
    }
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    for activation in [Activation::Tanh, Activation::Relu] {
        let x = Matrix::from_rows(&[
            vec![0.3, -1.2],
            vec![-0.7, 0.4],
            vec![1.1, 0.9],
            vec![-0.2, -0.5],
        ]);
        let y = vec![0, 1, 1, 0];
        let cfg = MlpConfig {
            hidden_layers: vec![3],
            activation,
            l2_alpha: 0.01,
            max_epochs: 1,
            batch_size: 4,
            seed: 77,
            ..Default::default()
        };
        let model = fit_mlp(&x, &y, 2, &cfg).unwrap();
        let rows: Vec<usize> = (0..4).collect();
        let params = model.params.clone();
        let (_, grad) = model.loss_and_grad(&params, &x, &y, &rows);
        let eps = 1e-5;
        for j in 0..params.len() {
            let mut plus = params.clone();
            plus[j] += eps;
            let mut minus = params.clone();
            minus[j] -= eps;
            let fd = (model.loss_and_grad(&plus, &x, &y, &rows).0
                - model.loss_and_grad(&minus, &x, &y, &rows).0)
                / (2.0 * eps);
            let rel = (grad[j] - fd).abs() / fd.abs().max(1.0);
            assert!(
                rel <= 1e-4,
                "{activation:?} param {j}: analytic {} vs fd {fd}",
                grad[j]
            );
        }
    }
}

#[test]
fn gbdt_train_loss_never_rises_without_subsampling() {
    let (x, y) = random_classification(4, 150, 4, 2);
    for growth in [Growth::DepthWise, Growth::LeafWise] {
        let cfg = GbdtConfig {
            growth,
            n_estimators: 60,
            learning_rate: 0.1,
            ..Default::default()
        };
        let model = fit_gbdt(&x, &y, 2, &cfg, None).unwrap();
        for w in model.train_loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{growth:?}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn forest_beats_the_majority_baseline_on_planted_signal() {
    let (x, y) = random_classification(21, 400, 4, 2);
    let train: Vec<usize> = (0..300).collect();
    let test: Vec<usize> = (300..400).collect();
    let model = fit_model(
        &ModelConfig::Forest(pyrocast_core::forest::ForestConfig {
            n_trees: 40,
            seed: 2,
            ..Default::default()
        }),
        &x.select_rows(&train),
        &train.iter().map(|&i| y[i]).collect::<Vec<_>>(),
        2,
    )
    .unwrap();
    let preds = model.predict(&x.select_rows(&test));
    let truth: Vec<usize> = test.iter().map(|&i| y[i]).collect();
    let acc = preds
        .iter()
        .zip(&truth)
        .filter(|(a, b)| a == b)
        .count() as f64
        / truth.len() as f64;
    let majority = truth.iter().filter(|&&c| c == 1).count().max(
        truth.iter().filter(|&&c| c == 0).count(),
    ) as f64
        / truth.len() as f64;
    assert!(acc > majority, "accuracy {acc} <= baseline {majority}");
}
