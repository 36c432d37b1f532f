//! Random forest: bagged Gini trees with per-split feature subsampling.

use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::math;
use crate::seeding;
use crate::tree::{grow, resolve_weights, ClassWeights, TreeConfig, TreeNode};
use crate::{Error, Result};

/// Features considered at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MaxFeatures {
    All,
    #[default]
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    fn resolve(self, n_features: usize) -> usize {
        match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => (math::sqrt(n_features as f64) as usize).max(1),
            MaxFeatures::Count(c) => c.clamp(1, n_features),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub class_weights: ClassWeights,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 16,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            class_weights: ClassWeights::Uniform,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<TreeNode>,
    pub n_classes: usize,
    pub config: ForestConfig,
}

impl RandomForest {
    /// Mean of the trees' leaf distributions.
    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        let mut acc = alloc::vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (a, &p) in acc.iter_mut().zip(tree.probs_for(row)) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        for a in &mut acc {
            *a /= n;
        }
        acc
    }
}

fn fit_one_tree(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    config: &ForestConfig,
    tree_seed: u64,
) -> TreeNode {
    let mut rng = seeding::rng(tree_seed);
    let n = x.n_rows();
    let indices: Vec<usize> = if config.bootstrap {
        (0..n).map(|_| rng.gen_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let weights = resolve_weights(y, &indices, n_classes, &config.class_weights);
    let tree_cfg = TreeConfig {
        max_depth: config.max_depth,
        min_samples_leaf: config.min_samples_leaf,
        class_weights: config.class_weights.clone(),
    };
    let max_features = config.max_features.resolve(x.n_cols());
    grow(
        x,
        y,
        &weights,
        &indices,
        n_classes,
        &tree_cfg,
        Some(max_features),
        &mut Some(&mut rng),
        0,
    )
}

/// Fit a bagged forest. Each tree draws a bootstrap sample and per-split
/// feature subsets from its own seed derived from `config.seed`, so the model
/// is identical regardless of how the tree fits are scheduled.
pub fn fit_forest(x: &Matrix, y: &[usize], n_classes: usize, config: &ForestConfig) -> Result<RandomForest> {
    if x.is_empty() {
        return Err(Error::EmptyInput("fit_forest"));
    }
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    if config.n_trees == 0 {
        return Err(Error::InvalidParam("n_trees must be >= 1".into()));
    }
    let seeds: Vec<u64> = (0..config.n_trees)
        .map(|t| seeding::derive(config.seed, t as u64))
        .collect();

    #[cfg(feature = "parallel")]
    let trees: Vec<TreeNode> = {
        use rayon::prelude::*;
        seeds
            .par_iter()
            .map(|&s| fit_one_tree(x, y, n_classes, config, s))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let trees: Vec<TreeNode> = seeds
        .iter()
        .map(|&s| fit_one_tree(x, y, n_classes, config, s))
        .collect();

    Ok(RandomForest {
        trees,
        n_classes,
        config: config.clone(),
    })
}
