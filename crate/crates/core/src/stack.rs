//! Stacked generalization: out-of-fold base-learner probabilities feed a
//! logistic meta learner; the bases are then refit on the full training set.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::forest::ForestConfig;
use crate::gbdt::{GbdtConfig, Growth};
use crate::linear::{fit_logistic, LogisticConfig, LogisticModel};
use crate::model::{fit_model, Model, ModelConfig};
use crate::resample::{smote_tomek, ResampleConfig};
use crate::search::stratified_kfold;
use crate::seeding;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    pub bases: Vec<ModelConfig>,
    pub meta: LogisticConfig,
    /// Folds used to produce out-of-fold meta features.
    pub n_folds: usize,
    pub seed: u64,
}

impl Default for StackConfig {
    fn default() -> Self {
        StackConfig {
            bases: alloc::vec![
                ModelConfig::Forest(ForestConfig::default()),
                ModelConfig::Gbdt(GbdtConfig {
                    growth: Growth::LeafWise,
                    ..Default::default()
                }),
            ],
            meta: LogisticConfig::default(),
            n_folds: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackModel {
    pub bases: Vec<Model>,
    pub meta: LogisticModel,
    pub n_classes: usize,
}

impl StackModel {
    /// Meta-feature row: per base, the probabilities of classes `1..K`
    /// (class 0 is redundant given the sum-to-one constraint).
    fn meta_row(&self, row: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.bases.len() * (self.n_classes - 1));
        for base in &self.bases {
            let p = base.predict_proba_row(row);
            out.extend_from_slice(&p[1..]);
        }
        out
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        self.meta.predict_proba_row(&self.meta_row(row))
    }
}

/// A fitted stack plus its fold bookkeeping: `oof_proba` row `i` comes from
/// base models that never saw row `i`, which also makes it suitable for
/// threshold selection without touching the test set.
#[derive(Debug, Clone)]
pub struct StackFit {
    pub model: StackModel,
    /// Fold id per training row.
    pub folds: Vec<usize>,
    /// Out-of-fold base meta features (n_rows x bases*(K-1)).
    pub oof_meta: Matrix,
    /// Meta learner applied to the out-of-fold meta features.
    pub oof_proba: Matrix,
}

/// Fit a stacked model. When `resample` is set, rebalancing runs inside each
/// fold's training split (and once more for the final refits); out-of-fold
/// rows are never resampled, so meta features stay leak-free.
pub fn fit_stack(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    config: &StackConfig,
    resample: Option<&ResampleConfig>,
) -> Result<StackFit> {
    if config.bases.len() < 2 {
        return Err(Error::InvalidParam("stack needs at least 2 base learners".into()));
    }
    if config.n_folds < 2 {
        return Err(Error::InvalidParam("n_folds must be >= 2".into()));
    }
    let folds = stratified_kfold(y, config.n_folds, seeding::derive(config.seed, 0))?;
    let n = x.n_rows();
    let meta_width = config.bases.len() * (n_classes - 1);

    // (base, fold) fits, each on its own derived seed
    let jobs: Vec<(usize, usize)> = (0..config.bases.len())
        .flat_map(|b| (0..config.n_folds).map(move |f| (b, f)))
        .collect();
    let run = |&(b, f): &(usize, usize)| -> Result<(Vec<usize>, Matrix)> {
        let train_idx: Vec<usize> = (0..n).filter(|&i| folds[i] != f).collect();
        let holdout_idx: Vec<usize> = (0..n).filter(|&i| folds[i] == f).collect();
        let mut train_x = x.select_rows(&train_idx);
        let mut train_y: Vec<usize> = train_idx.iter().map(|&i| y[i]).collect();
        if let Some(rc) = resample {
            let fold_rc = ResampleConfig {
                seed: seeding::derive(rc.seed, (b * config.n_folds + f) as u64),
                ..rc.clone()
            };
            let (rx, ry, _) = smote_tomek(&train_x, &train_y, &fold_rc)?;
            train_x = rx;
            train_y = ry;
        }
        let seed = seeding::derive(config.seed, 1 + (b * config.n_folds + f) as u64);
        let model = fit_model(&config.bases[b].with_seed(seed), &train_x, &train_y, n_classes)?;
        let probs = model.predict_proba(&x.select_rows(&holdout_idx));
        Ok((holdout_idx, probs))
    };

    #[cfg(feature = "parallel")]
    let fold_outputs: Vec<Result<(Vec<usize>, Matrix)>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let fold_outputs: Vec<Result<(Vec<usize>, Matrix)>> = jobs.iter().map(run).collect();

    let mut oof_meta = Matrix::zeros(n, meta_width);
    for (job, output) in jobs.iter().zip(fold_outputs) {
        let (b, _) = *job;
        let (holdout_idx, probs) = output?;
        for (pos, &i) in holdout_idx.iter().enumerate() {
            for c in 1..n_classes {
                oof_meta.set(i, b * (n_classes - 1) + (c - 1), probs.get(pos, c));
            }
        }
    }

    let meta = fit_logistic(&oof_meta, y, n_classes, &config.meta)?;

    // Final base learners refit on the full (optionally resampled) train set.
    let fit_final = |b: usize| -> Result<Model> {
        let mut train_x = x.clone();
        let mut train_y = y.to_vec();
        if let Some(rc) = resample {
            let final_rc = ResampleConfig {
                seed: seeding::derive(rc.seed, (config.bases.len() * config.n_folds + b) as u64),
                ..rc.clone()
            };
            let (rx, ry, _) = smote_tomek(&train_x, &train_y, &final_rc)?;
            train_x = rx;
            train_y = ry;
        }
        let seed = seeding::derive(config.seed, 1000 + b as u64);
        fit_model(&config.bases[b].with_seed(seed), &train_x, &train_y, n_classes)
    };
    #[cfg(feature = "parallel")]
    let bases: Vec<Result<Model>> = {
        use rayon::prelude::*;
        (0..config.bases.len()).into_par_iter().map(fit_final).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let bases: Vec<Result<Model>> = (0..config.bases.len()).map(fit_final).collect();
    let bases = bases.into_iter().collect::<Result<Vec<Model>>>()?;

    let oof_proba = {
        let mut out = Matrix::zeros(n, n_classes);
        for i in 0..n {
            let p = meta.predict_proba_row(oof_meta.row(i));
            out.row_mut(i).copy_from_slice(&p);
        }
        out
    };

    Ok(StackFit {
        model: StackModel {
            bases,
            meta,
            n_classes,
        },
        folds,
        oof_meta,
        oof_proba,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{argmax, ClassWeights, TreeConfig};
    use alloc::vec;

    fn informative() -> (Matrix, Vec<usize>) {
        // one feature fully determines the class
        let rows: Vec<Vec<f64>> = (0..80)
            .map(|i| vec![if i % 2 == 0 { -1.0 } else { 1.0 } + (i % 7) as f64 * 1e-3])
            .collect();
        let y: Vec<usize> = (0..80).map(|i| i % 2).collect();
        (Matrix::from_rows(&rows), y)
    }

    fn small_stack() -> StackConfig {
        StackConfig {
            bases: vec![
                ModelConfig::Forest(ForestConfig {
                    n_trees: 10,
                    ..Default::default()
                }),
                ModelConfig::Gbdt(GbdtConfig {
                    growth: Growth::LeafWise,
                    n_estimators: 20,
                    ..Default::default()
                }),
            ],
            meta: LogisticConfig::default(),
            n_folds: 4,
            seed: 5,
        }
    }

    #[test]
    fn stack_learns_an_informative_feature() {
        let (x, y) = informative();
        let fit = fit_stack(&x, &y, 2, &small_stack(), None).unwrap();
        let correct = (0..x.n_rows())
            .filter(|&i| argmax(&fit.model.predict_proba_row(x.row(i))) == y[i])
            .count();
        assert_eq!(correct, x.n_rows());
    }

    #[test]
    fn constant_bases_degenerate_to_the_prior() {
        // depth-0 trees always output the class prior
        let (x, mut y) = informative();
        // unbalance: majority class 0
        for label in y.iter_mut().skip(60) {
            *label = 0;
        }
        let cfg = StackConfig {
            bases: vec![
                ModelConfig::Tree(TreeConfig {
                    max_depth: 0,
                    min_samples_leaf: 1,
                    class_weights: ClassWeights::Uniform,
                }),
                ModelConfig::Tree(TreeConfig {
                    max_depth: 0,
                    min_samples_leaf: 2,
                    class_weights: ClassWeights::Uniform,
                }),
            ],
            meta: LogisticConfig::default(),
            n_folds: 4,
            seed: 1,
        };
        let fit = fit_stack(&x, &y, 2, &cfg, None).unwrap();
        let majority = 0;
        for i in 0..x.n_rows() {
            assert_eq!(argmax(&fit.model.predict_proba_row(x.row(i))), majority);
        }
    }

    #[test]
    fn seeded_fits_are_identical() {
        let (x, y) = informative();
        let a = fit_stack(&x, &y, 2, &small_stack(), None).unwrap();
        let b = fit_stack(&x, &y, 2, &small_stack(), None).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.oof_meta, b.oof_meta);
    }

    #[test]
    fn oof_rows_only_come_from_other_folds() {
        let (x, y) = informative();
        let fit = fit_stack(&x, &y, 2, &small_stack(), None).unwrap();
        // fold bookkeeping: every row has a fold, all folds non-empty
        assert_eq!(fit.folds.len(), x.n_rows());
        for f in 0..4 {
            assert!(fit.folds.iter().any(|&x| x == f));
        }
        // oof probabilities are genuine probabilities
        for i in 0..x.n_rows() {
            let s: f64 = fit.oof_proba.row(i).iter().sum();
            assert!((s - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn stack_probabilities_sum_to_one() {
        let (x, y) = informative();
        let fit = fit_stack(&x, &y, 2, &small_stack(), None).unwrap();
        for i in 0..x.n_rows() {
            let p = fit.model.predict_proba_row(x.row(i));
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }
}
