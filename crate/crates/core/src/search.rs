//! Stratified k-fold assignment and randomized hyperparameter search with
//! cross-validated scoring.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::forest::{ForestConfig, MaxFeatures};
use crate::gbdt::{GbdtConfig, Growth};
use crate::linear::LogisticConfig;
use crate::metrics;
use crate::mlp::{Activation, MlpConfig};
use crate::model::{fit_model, ModelConfig};
use crate::resample::{smote_tomek, ResampleConfig};
use crate::seeding;
use crate::tree::ClassWeights;
use crate::{Error, Result};

/// Fold id per row; per-class counts across folds differ by at most one.
/// Deterministic in the seed.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidParam("k must be >= 2".into()));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = alloc::vec![0usize; n_classes];
    for &y in labels {
        counts[y] += 1;
    }
    for (class, &count) in counts.iter().enumerate() {
        if count > 0 && count < k {
            return Err(Error::ClassTooSmall {
                class,
                count,
                required: k,
            });
        }
    }
    let mut folds = alloc::vec![0usize; labels.len()];
    for class in 0..n_classes {
        let mut idx: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, &y)| (y == class).then_some(i))
            .collect();
        let mut rng = seeding::rng(seeding::derive(seed, class as u64));
        idx.shuffle(&mut rng);
        for (pos, &i) in idx.iter().enumerate() {
            folds[i] = pos % k;
        }
    }
    Ok(folds)
}

/// What the search optimizes on each validation fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Scoring {
    #[default]
    MacroF1,
    /// Recall of the last (high-risk) class.
    HighRecall,
    Accuracy,
}

impl Scoring {
    pub fn score(self, labels: &[usize], predictions: &[usize], n_classes: usize) -> Result<f64> {
        let report = metrics::report(labels, predictions, n_classes)?;
        Ok(match self {
            Scoring::MacroF1 => report.macro_f1,
            Scoring::HighRecall => report.per_class.last().map_or(0.0, |m| m.recall),
            Scoring::Accuracy => report.accuracy,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub n_iter: usize,
    pub n_folds: usize,
    pub scoring: Scoring,
    pub seed: u64,
}

impl Default for SearchSpec {
    fn default() -> Self {
        SearchSpec {
            n_iter: 20,
            n_folds: 3,
            scoring: Scoring::MacroF1,
            seed: 0,
        }
    }
}

fn choose<T: Clone>(rng: &mut ChaCha8Rng, options: &[T]) -> T {
    options[rng.gen_range(0..options.len())].clone()
}

/// Candidate value lists per forest hyperparameter; each draw picks uniformly
/// from each list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestSpace {
    pub n_trees: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub min_samples_leaf: Vec<usize>,
    pub balanced: Vec<bool>,
}

impl Default for ForestSpace {
    fn default() -> Self {
        ForestSpace {
            n_trees: alloc::vec![100, 200],
            max_depth: alloc::vec![8, 12, 16],
            min_samples_leaf: alloc::vec![1, 5],
            balanced: alloc::vec![false],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtSpace {
    pub growth: Growth,
    pub learning_rate: Vec<f64>,
    pub n_estimators: Vec<usize>,
    pub max_depth: Vec<usize>,
    pub max_leaves: Vec<usize>,
    pub l2_lambda: Vec<f64>,
}

impl Default for GbdtSpace {
    fn default() -> Self {
        GbdtSpace {
            growth: Growth::LeafWise,
            learning_rate: alloc::vec![0.01, 0.05, 0.1],
            n_estimators: alloc::vec![100, 200],
            max_depth: alloc::vec![4, 6, 8],
            max_leaves: alloc::vec![15, 31, 63],
            l2_lambda: alloc::vec![0.0, 1.0, 5.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpSpace {
    pub hidden_layers: Vec<Vec<usize>>,
    pub activation: Vec<Activation>,
    pub l2_alpha: Vec<f64>,
    pub learning_rate: Vec<f64>,
    pub batch_size: Vec<usize>,
    pub max_epochs: Vec<usize>,
}

impl Default for MlpSpace {
    fn default() -> Self {
        MlpSpace {
            hidden_layers: alloc::vec![alloc::vec![100, 100, 50]],
            activation: alloc::vec![Activation::Relu, Activation::Tanh],
            l2_alpha: alloc::vec![1e-4, 1e-3],
            learning_rate: alloc::vec![1e-3],
            batch_size: alloc::vec![64],
            max_epochs: alloc::vec![20],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticSpace {
    pub l2: Vec<f64>,
}

impl Default for LogisticSpace {
    fn default() -> Self {
        LogisticSpace {
            l2: alloc::vec![1e-4, 1e-2, 1.0],
        }
    }
}

/// Per-family hyperparameter distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SearchSpace {
    Forest(ForestSpace),
    Gbdt(GbdtSpace),
    Logistic(LogisticSpace),
    Mlp(MlpSpace),
}

impl SearchSpace {
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> ModelConfig {
        match self {
            SearchSpace::Forest(s) => ModelConfig::Forest(ForestConfig {
                n_trees: choose(rng, &s.n_trees),
                max_depth: choose(rng, &s.max_depth),
                min_samples_leaf: choose(rng, &s.min_samples_leaf),
                max_features: MaxFeatures::Sqrt,
                bootstrap: true,
                class_weights: if choose(rng, &s.balanced) {
                    ClassWeights::Balanced
                } else {
                    ClassWeights::Uniform
                },
                seed: 0,
            }),
            SearchSpace::Gbdt(s) => ModelConfig::Gbdt(GbdtConfig {
                growth: s.growth,
                learning_rate: choose(rng, &s.learning_rate),
                n_estimators: choose(rng, &s.n_estimators),
                max_depth: choose(rng, &s.max_depth),
                max_leaves: choose(rng, &s.max_leaves),
                l2_lambda: choose(rng, &s.l2_lambda),
                ..Default::default()
            }),
            SearchSpace::Logistic(s) => ModelConfig::Logistic(LogisticConfig {
                l2: choose(rng, &s.l2),
                ..Default::default()
            }),
            SearchSpace::Mlp(s) => ModelConfig::Mlp(MlpConfig {
                hidden_layers: choose(rng, &s.hidden_layers),
                activation: choose(rng, &s.activation),
                l2_alpha: choose(rng, &s.l2_alpha),
                learning_rate: choose(rng, &s.learning_rate),
                batch_size: choose(rng, &s.batch_size),
                max_epochs: choose(rng, &s.max_epochs),
                seed: 0,
            }),
        }
    }
}

/// One sampled configuration's cross-validation record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvRow {
    pub iteration: usize,
    pub config: ModelConfig,
    pub fold_scores: Vec<f64>,
    pub mean_score: f64,
}

/// Randomized search: draw `n_iter` configs, score each with stratified
/// k-fold CV, return the argmax (ties go to the first sampled) and the full
/// table. When `resample` is set, rebalancing runs inside each fold's
/// training split only.
pub fn random_search(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    spec: &SearchSpec,
    space: &SearchSpace,
    resample: Option<&ResampleConfig>,
) -> Result<(ModelConfig, Vec<CvRow>)> {
    if spec.n_iter == 0 {
        return Err(Error::InvalidParam("n_iter must be >= 1".into()));
    }
    let folds = stratified_kfold(y, spec.n_folds, seeding::derive(spec.seed, 0))?;
    let mut rng = seeding::rng(seeding::derive(spec.seed, 1));
    let configs: Vec<ModelConfig> = (0..spec.n_iter).map(|_| space.sample(&mut rng)).collect();

    let jobs: Vec<(usize, usize)> = (0..spec.n_iter)
        .flat_map(|i| (0..spec.n_folds).map(move |f| (i, f)))
        .collect();
    let run = |&(iter, fold): &(usize, usize)| -> Result<f64> {
        let train_idx: Vec<usize> = (0..y.len()).filter(|&i| folds[i] != fold).collect();
        let test_idx: Vec<usize> = (0..y.len()).filter(|&i| folds[i] == fold).collect();
        let mut train_x = x.select_rows(&train_idx);
        let mut train_y: Vec<usize> = train_idx.iter().map(|&i| y[i]).collect();
        if let Some(rc) = resample {
            let fold_rc = ResampleConfig {
                seed: seeding::derive(rc.seed, (iter * spec.n_folds + fold) as u64),
                ..rc.clone()
            };
            let (rx, ry, _) = smote_tomek(&train_x, &train_y, &fold_rc)?;
            train_x = rx;
            train_y = ry;
        }
        let seed = seeding::derive(spec.seed, 2 + (iter * spec.n_folds + fold) as u64);
        let model = fit_model(&configs[iter].with_seed(seed), &train_x, &train_y, n_classes)?;
        let preds = model.predict(&x.select_rows(&test_idx));
        let truth: Vec<usize> = test_idx.iter().map(|&i| y[i]).collect();
        spec.scoring.score(&truth, &preds, n_classes)
    };

    #[cfg(feature = "parallel")]
    let scores: Vec<Result<f64>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let scores: Vec<Result<f64>> = jobs.iter().map(run).collect();

    let mut table = Vec::with_capacity(spec.n_iter);
    for (iter, config) in configs.into_iter().enumerate() {
        let fold_scores: Vec<f64> = scores[iter * spec.n_folds..(iter + 1) * spec.n_folds]
            .iter()
            .cloned()
            .collect::<Result<Vec<f64>>>()?;
        let mean_score = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
        table.push(CvRow {
            iteration: iter,
            config,
            fold_scores,
            mean_score,
        });
    }
    let best = table
        .iter()
        .fold(None::<&CvRow>, |best, row| match best {
            Some(b) if b.mean_score >= row.mean_score => Some(b),
            _ => Some(row),
        })
        .expect("n_iter >= 1");
    Ok((best.config.clone(), table.clone()))
}
