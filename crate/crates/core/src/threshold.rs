//! Decision-threshold optimization for binary models: exhaustive grid search
//! maximizing the high-class F1, ties resolved toward the lower threshold
//! (favouring recall).

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Evaluation grid: 0.01, 0.02, ..., 0.99.
pub fn threshold_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub threshold: f64,
    /// High-class F1 at the chosen threshold.
    pub best_f1: f64,
    /// The full (threshold, F1) curve over the grid.
    pub curve: Vec<(f64, f64)>,
}

/// F1 of the positive class when predicting positive at `prob >= threshold`.
pub fn f1_at_threshold(probs_high: &[f64], labels: &[usize], threshold: f64) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for (&p, &y) in probs_high.iter().zip(labels) {
        let pred = p >= threshold;
        match (pred, y == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return 0.0;
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Exhaustive grid evaluation of the high-class F1.
pub fn optimize_threshold(probs_high: &[f64], labels: &[usize]) -> Result<ThresholdResult> {
    if probs_high.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: probs_high.len(),
            right: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(Error::SingleClass("optimize_threshold"));
    }
    if let Some(&bad) = probs_high.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidParam(alloc::format!(
            "probability {bad} outside [0,1]"
        )));
    }
    let mut curve = Vec::with_capacity(99);
    let mut best = (0.0f64, f64::NEG_INFINITY); // (threshold, f1)
    for t in threshold_grid() {
        let f1 = f1_at_threshold(probs_high, labels, t);
        if f1 > best.1 {
            best = (t, f1);
        }
        curve.push((t, f1));
    }
    Ok(ThresholdResult {
        threshold: best.0,
        best_f1: best.1,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn separable_scores_take_the_lowest_perfect_grid_point() {
        let probs = vec![0.1, 0.2, 0.8, 0.9];
        let labels = vec![0, 0, 1, 1];
        let r = optimize_threshold(&probs, &labels).unwrap();
        assert_eq!(r.best_f1, 1.0);
        // every threshold in (0.2, 0.8] is perfect; the lowest grid point is 0.21
        assert!((r.threshold - 0.21).abs() < 1e-12, "{}", r.threshold);
    }

    #[test]
    fn probs_equal_labels_tie_to_lowest_threshold() {
        let labels = vec![0, 1, 0, 1, 1, 0];
        let probs: Vec<f64> = labels.iter().map(|&y| y as f64).collect();
        let r = optimize_threshold(&probs, &labels).unwrap();
        assert_eq!(r.threshold, 0.01);
        assert!(r.curve.iter().all(|&(_, f1)| f1 == 1.0));
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(optimize_threshold(&[0.5, 0.6], &[1, 1]).is_err());
    }

    #[test]
    fn curve_covers_the_whole_grid() {
        let probs = vec![0.3, 0.4, 0.6, 0.35];
        let labels = vec![0, 1, 1, 0];
        let r = optimize_threshold(&probs, &labels).unwrap();
        assert_eq!(r.curve.len(), 99);
        let max = r.curve.iter().map(|&(_, f)| f).fold(f64::MIN, f64::max);
        assert_eq!(r.best_f1, max);
    }
}
