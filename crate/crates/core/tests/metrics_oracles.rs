//! Metric verification against brute-force counting and algebraic oracles.

use pyrocast_core::metrics::{confusion, correlation_matrix, report, roc_auc, vif};
use pyrocast_core::reference;
use pyrocast_core::threshold::{optimize_threshold, threshold_grid};
use pyrocast_core::Matrix;
use rand::Rng;

#[test]
fn report_matches_counting_oracle_per_scheme() {
    for (scheme_seed, n_classes) in [(1u64, 2usize), (2, 3)] {
        let mut rng = pyrocast_core::seeding::rng(scheme_seed);
        let labels: Vec<usize> = (0..1000).map(|_| rng.gen_range(0..n_classes)).collect();
        let preds: Vec<usize> = (0..1000).map(|_| rng.gen_range(0..n_classes)).collect();
        let got = report(&labels, &preds, n_classes).unwrap();
        let (per_class, accuracy, macro_avg, weighted) =
            reference::report_counting(&labels, &preds, n_classes);
        for (c, (p, r, f1, support)) in per_class.iter().enumerate() {
            assert!((got.per_class[c].precision - p).abs() <= 1e-12);
            assert!((got.per_class[c].recall - r).abs() <= 1e-12);
            assert!((got.per_class[c].f1 - f1).abs() <= 1e-12);
            assert_eq!(got.per_class[c].support, *support);
        }
        assert!((got.accuracy - accuracy).abs() <= 1e-12);
        assert!((got.macro_precision - macro_avg.0).abs() <= 1e-12);
        assert!((got.macro_recall - macro_avg.1).abs() <= 1e-12);
        assert!((got.macro_f1 - macro_avg.2).abs() <= 1e-12);
        assert!((got.weighted_precision - weighted.0).abs() <= 1e-12);
        assert!((got.weighted_recall - weighted.1).abs() <= 1e-12);
        assert!((got.weighted_f1 - weighted.2).abs() <= 1e-12);
        // the algebraic identity is exact, not just within tolerance
        assert_eq!(got.weighted_recall, got.accuracy);
    }
}

#[test]
fn confusion_matches_hand_tally() {
    let mut rng = pyrocast_core::seeding::rng(5);
    let labels: Vec<usize> = (0..100).map(|_| rng.gen_range(0..3)).collect();
    let preds: Vec<usize> = (0..100).map(|_| rng.gen_range(0..3)).collect();
    let got = confusion(&labels, &preds, 3).unwrap();
    for t in 0..3 {
        for p in 0..3 {
            let count = labels
                .iter()
                .zip(&preds)
                .filter(|&(&l, &q)| l == t && q == p)
                .count();
            assert_eq!(got[t][p], count);
        }
    }
}

#[test]
fn auc_matches_pairwise_oracle_including_ties() {
    let mut rng = pyrocast_core::seeding::rng(11);
    for case in 0..30 {
        let n = rng.gen_range(10..=500);
        let heavy_ties = case % 2 == 0;
        let scores: Vec<f64> = (0..n)
            .map(|_| {
                if heavy_ties {
                    rng.gen_range(0..5) as f64 / 4.0
                } else {
                    rng.gen_range(0.0..1.0)
                }
            })
            .collect();
        let mut labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let got = roc_auc(&scores, &labels).unwrap();
        let want = reference::auc_pairwise(&scores, &labels);
        assert!((got - want).abs() <= 1e-12, "case {case}: {got} vs {want}");
        // negation identity
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let got_neg = roc_auc(&neg, &labels).unwrap();
        assert!((got + got_neg - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn vif_matches_gram_schmidt_oracle() {
    let mut rng = pyrocast_core::seeding::rng(23);
    for _ in 0..10 {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let x = Matrix::from_rows(&rows);
        let got = vif(&x).unwrap();
        let want = reference::vif_gram_schmidt(&x);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() / w.abs() <= 1e-6, "{g} vs {w}");
            assert!(*g >= 1.0 - 1e-9, "finite VIF below 1: {g}");
        }
    }
}

#[test]
fn vif_flags_exact_collinearity_on_both_columns() {
    let mut rng = pyrocast_core::seeding::rng(29);
    let rows: Vec<Vec<f64>> = (0..40)
        .map(|_| {
            let a = rng.gen_range(-1.0..1.0);
            let b = rng.gen_range(-1.0..1.0);
            vec![a, b, a]
        })
        .collect();
    let got = vif(&Matrix::from_rows(&rows)).unwrap();
    assert!(got[0].is_infinite());
    assert!(got[2].is_infinite());
    assert!(got[1].is_finite());
}

#[test]
fn correlation_matches_raw_moment_oracle() {
    let mut rng = pyrocast_core::seeding::rng(37);
    let rows: Vec<Vec<f64>> = (0..100)
        .map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let x = Matrix::from_rows(&rows);
    let (got, flags) = correlation_matrix(&x).unwrap();
    let want = reference::correlation_raw_moments(&x);
    assert!(flags.iter().all(|&f| !f));
    for j in 0..5 {
        for k in 0..5 {
            assert!(
                (got.get(j, k) - want.get(j, k)).abs() <= 1e-12,
                "({j},{k}): {} vs {}",
                got.get(j, k),
                want.get(j, k)
            );
            assert_eq!(got.get(j, k), got.get(k, j));
        }
    }
}

#[test]
fn threshold_search_matches_bruteforce_grid_recount() {
    let mut rng = pyrocast_core::seeding::rng(41);
    for case in 0..100 {
        let n = 20;
        let probs: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let got = optimize_threshold(&probs, &labels).unwrap();
        let mut best = (0.0f64, f64::NEG_INFINITY);
        for t in threshold_grid() {
            let f1 = reference::f1_recount(&probs, &labels, t);
            if f1 > best.1 {
                best = (t, f1);
            }
        }
        assert_eq!(got.threshold, best.0, "case {case}");
        assert!((got.best_f1 - best.1).abs() <= 1e-12, "case {case}");
        for (k, &(t, f1)) in got.curve.iter().enumerate() {
            let want = reference::f1_recount(&probs, &labels, t);
            assert!((f1 - want).abs() <= 1e-12, "case {case} grid {k}");
        }
    }
}
