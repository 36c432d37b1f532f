//! Greedy Gini decision tree, the base learner for bagged forests.
//!
//! Splits maximize the Gini impurity decrease with deterministic tie-breaking
//! (lowest feature index, then lowest threshold). Zero-gain splits are
//! allowed so parity-style interactions are still separable below the depth
//! cap; pure nodes never split.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::{Error, Result};

/// Per-class weighting inside the split criterion and leaf distributions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub enum ClassWeights {
    #[default]
    Uniform,
    /// Inverse class frequency, `n / (k * count_c)`.
    Balanced,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub class_weights: ClassWeights,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: 16,
            min_samples_leaf: 1,
            class_weights: ClassWeights::Uniform,
        }
    }
}

/// Binary tree over numeric features; rows with `value <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        probs: Vec<f64>,
    },
}

impl TreeNode {
    pub fn probs_for(&self, row: &[f64]) -> &[f64] {
        match self {
            TreeNode::Leaf { probs } => probs,
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.probs_for(row)
                } else {
                    right.probs_for(row)
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub n_classes: usize,
    pub config: TreeConfig,
}

impl DecisionTree {
    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        self.root.probs_for(row).to_vec()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax(self.root.probs_for(row))
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn gini(weighted_counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let mut sum_sq = 0.0;
    for &c in weighted_counts {
        let p = c / total;
        sum_sq += p * p;
    }
    1.0 - sum_sq
}

/// Best split of the given rows on one feature, if any position satisfies the
/// leaf-size floor. Returns `(gain, threshold, n_left)`.
#[allow(clippy::too_many_arguments)]
fn best_split_on_feature(
    x: &Matrix,
    y: &[usize],
    weights: &[f64],
    indices: &[usize],
    feature: usize,
    n_classes: usize,
    min_samples_leaf: usize,
    parent_gini: f64,
    total_weight: f64,
) -> Option<(f64, f64)> {
    let mut vals: Vec<(f64, usize)> = indices.iter().map(|&i| (x.get(i, feature), i)).collect();
    vals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let mut left_counts = alloc::vec![0.0; n_classes];
    let mut left_weight = 0.0;
    let mut total_counts = alloc::vec![0.0; n_classes];
    for &(_, i) in &vals {
        total_counts[y[i]] += weights[y[i]];
    }

    let mut best: Option<(f64, f64)> = None;
    for pos in 0..vals.len() - 1 {
        let (v, i) = vals[pos];
        left_counts[y[i]] += weights[y[i]];
        left_weight += weights[y[i]];
        let next_v = vals[pos + 1].0;
        if next_v <= v {
            continue; // not between distinct values
        }
        let n_left = pos + 1;
        let n_right = vals.len() - n_left;
        if n_left < min_samples_leaf || n_right < min_samples_leaf {
            continue;
        }
        let right_counts: Vec<f64> = total_counts
            .iter()
            .zip(&left_counts)
            .map(|(t, l)| t - l)
            .collect();
        let right_weight = total_weight - left_weight;
        let gain = parent_gini
            - left_weight / total_weight * gini(&left_counts, left_weight)
            - right_weight / total_weight * gini(&right_counts, right_weight);
        let threshold = v + (next_v - v) / 2.0;
        match best {
            Some((bg, _)) if bg >= gain => {}
            _ => best = Some((gain, threshold)),
        }
    }
    best
}

pub(crate) fn grow(
    x: &Matrix,
    y: &[usize],
    weights: &[f64],
    indices: &[usize],
    n_classes: usize,
    config: &TreeConfig,
    max_features: Option<usize>,
    rng: &mut Option<&mut ChaCha8Rng>,
    depth: usize,
) -> TreeNode {
    let mut counts = alloc::vec![0.0; n_classes];
    let mut total = 0.0;
    for &i in indices {
        counts[y[i]] += weights[y[i]];
        total += weights[y[i]];
    }
    let leaf = |counts: &[f64], total: f64| TreeNode::Leaf {
        probs: counts.iter().map(|&c| c / total).collect(),
    };

    let parent_gini = gini(&counts, total);
    if depth >= config.max_depth
        || parent_gini == 0.0
        || indices.len() < 2 * config.min_samples_leaf.max(1)
    {
        return leaf(&counts, total);
    }

    // Candidate features, ascending so first-found wins ties by lowest index.
    let features: Vec<usize> = match (max_features, rng.as_deref_mut()) {
        (Some(m), Some(rng)) if m < x.n_cols() => {
            let mut all: Vec<usize> = (0..x.n_cols()).collect();
            all.shuffle(rng);
            let mut chosen = all[..m].to_vec();
            chosen.sort_unstable();
            chosen
        }
        _ => (0..x.n_cols()).collect(),
    };

    let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
    for &f in &features {
        if let Some((gain, threshold)) = best_split_on_feature(
            x,
            y,
            weights,
            indices,
            f,
            n_classes,
            config.min_samples_leaf,
            parent_gini,
            total,
        ) {
            let better = match best {
                None => true,
                Some((bg, _, _)) => gain > bg,
            };
            if better {
                best = Some((gain, f, threshold));
            }
        }
    }

    let Some((_, feature, threshold)) = best else {
        return leaf(&counts, total);
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| x.get(i, feature) <= threshold);
    let left = grow(
        x, y, weights, &left_idx, n_classes, config, max_features, rng, depth + 1,
    );
    let right = grow(
        x, y, weights, &right_idx, n_classes, config, max_features, rng, depth + 1,
    );
    TreeNode::Split {
        feature,
        threshold,
        left: Box::new(left),
        right: Box::new(right),
    }
}

/// Per-class weights resolved against the sample multiset being fit.
pub(crate) fn resolve_weights(
    y: &[usize],
    indices: &[usize],
    n_classes: usize,
    cw: &ClassWeights,
) -> Vec<f64> {
    match cw {
        ClassWeights::Uniform => alloc::vec![1.0; n_classes],
        ClassWeights::Custom(w) => {
            assert_eq!(w.len(), n_classes, "custom class weight length");
            w.clone()
        }
        ClassWeights::Balanced => {
            let mut counts = alloc::vec![0usize; n_classes];
            for &i in indices {
                counts[y[i]] += 1;
            }
            let n = indices.len() as f64;
            let k = counts.iter().filter(|&&c| c > 0).count() as f64;
            counts
                .iter()
                .map(|&c| if c == 0 { 0.0 } else { n / (k * c as f64) })
                .collect()
        }
    }
}

/// Fit a single decision tree on all rows with all features.
pub fn fit_tree(x: &Matrix, y: &[usize], n_classes: usize, config: &TreeConfig) -> Result<DecisionTree> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput("fit_tree"));
    }
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::InvalidParam(alloc::format!(
            "label {bad} out of range for {n_classes} classes"
        )));
    }
    let indices: Vec<usize> = (0..x.n_rows()).collect();
    let weights = resolve_weights(y, &indices, n_classes, &config.class_weights);
    let root = grow(x, y, &weights, &indices, n_classes, config, None, &mut None, 0);
    Ok(DecisionTree {
        root,
        n_classes,
        config: config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn pure_input_is_single_leaf() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]);
        let tree = fit_tree(&x, &[1, 1, 1], 2, &TreeConfig::default()).unwrap();
        assert!(matches!(tree.root, TreeNode::Leaf { .. }));
        assert_eq!(tree.predict_proba_row(&[9.0]), vec![0.0, 1.0]);
    }

    #[test]
    fn separable_1d_splits_once() {
        let x = Matrix::from_rows(&[vec![0.1], vec![0.3], vec![0.7], vec![0.9]]);
        let y = vec![0, 0, 1, 1];
        let tree = fit_tree(&x, &y, 2, &TreeConfig::default()).unwrap();
        assert_eq!(tree.root.depth(), 1);
        match &tree.root {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, 0.5),
            TreeNode::Leaf { .. } => panic!("expected a split"),
        }
        for (i, &label) in y.iter().enumerate() {
            assert_eq!(tree.predict_row(x.row(i)), label);
        }
    }

    #[test]
    fn xor_is_solved_at_depth_two() {
        let x = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ]);
        let y = vec![0, 1, 1, 0];
        let tree = fit_tree(&x, &y, 2, &TreeConfig::default()).unwrap();
        for (i, &label) in y.iter().enumerate() {
            assert_eq!(tree.predict_row(x.row(i)), label, "row {i}");
        }
        assert!(tree.root.depth() >= 2);
    }

    #[test]
    fn min_samples_leaf_is_respected() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0], vec![4.0]]);
        let y = vec![0, 0, 1, 0, 1];
        let cfg = TreeConfig {
            min_samples_leaf: 2,
            ..Default::default()
        };
        let tree = fit_tree(&x, &y, 2, &cfg).unwrap();
        fn check(node: &TreeNode) {
            if let TreeNode::Split { left, right, .. } = node {
                check(left);
                check(right);
            }
        }
        check(&tree.root);
        assert!(tree.root.n_leaves() <= 2); // 5 rows, leaves of >= 2
    }

    #[test]
    fn leaf_probabilities_sum_to_one() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = vec![0, 1, 1, 2];
        let tree = fit_tree(&x, &y, 3, &TreeConfig { max_depth: 1, ..Default::default() }).unwrap();
        for row in [[0.5], [2.5]] {
            let p = tree.predict_proba_row(&row);
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn empty_input_is_error() {
        let x = Matrix::from_rows(&[]);
        assert!(fit_tree(&x, &[], 2, &TreeConfig::default()).is_err());
    }
}
