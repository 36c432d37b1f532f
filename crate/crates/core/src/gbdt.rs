//! Histogram-binned gradient-boosted decision trees with logistic loss.
//!
//! Features are quantile-binned once on the training data (lossless when a
//! feature has no more distinct values than bins). Each round fits a tree to
//! per-sample gradients `g = p - y` and hessians `h = p (1 - p)`; leaves take
//! the Newton value `-G / (H + lambda)`. `DepthWise` growth expands whole
//! levels to `max_depth`; `LeafWise` repeatedly splits the open leaf with the
//! best gain until `max_leaves`. Multiclass is one-vs-rest.

use alloc::boxed::Box;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Growth {
    #[default]
    DepthWise,
    LeafWise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub growth: Growth,
    pub n_estimators: usize,
    pub learning_rate: f64,
    /// Depth cap for depth-wise growth.
    pub max_depth: usize,
    /// Leaf cap for leaf-wise growth.
    pub max_leaves: usize,
    pub l2_lambda: f64,
    pub n_bins: usize,
    /// Stop when validation loss has not improved for this many rounds and
    /// truncate to the best round. Requires validation data.
    pub early_stopping_rounds: Option<usize>,
    /// Gradient/hessian weight on positive-class samples (binary only).
    pub scale_pos_weight: f64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        GbdtConfig {
            growth: Growth::DepthWise,
            n_estimators: 100,
            learning_rate: 0.1,
            max_depth: 6,
            max_leaves: 31,
            l2_lambda: 1.0,
            n_bins: 255,
            early_stopping_rounds: None,
            scale_pos_weight: 1.0,
        }
    }
}

impl GbdtConfig {
    pub fn validate(&self) -> Result<()> {
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::InvalidParam("learning_rate must be >= 0".into()));
        }
        if !(2..=255).contains(&self.n_bins) {
            return Err(Error::InvalidParam("n_bins must be in 2..=255".into()));
        }
        if self.l2_lambda < 0.0 {
            return Err(Error::InvalidParam("l2_lambda must be >= 0".into()));
        }
        if self.n_estimators == 0 || self.max_depth == 0 || self.max_leaves < 2 {
            return Err(Error::InvalidParam(
                "n_estimators/max_depth must be >= 1, max_leaves >= 2".into(),
            ));
        }
        if self.early_stopping_rounds == Some(0) {
            return Err(Error::InvalidParam("early_stopping_rounds must be >= 1".into()));
        }
        Ok(())
    }
}

/// Regression tree with raw-score leaves (already scaled by the learning
/// rate); rows with `value <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GbdtNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<GbdtNode>,
        right: Box<GbdtNode>,
    },
    Leaf {
        value: f64,
    },
}

impl GbdtNode {
    pub fn score_for(&self, row: &[f64]) -> f64 {
        match self {
            GbdtNode::Leaf { value } => *value,
            GbdtNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.score_for(row)
                } else {
                    right.score_for(row)
                }
            }
        }
    }
}

/// One binary booster (the whole model for two classes, one of K for
/// one-vs-rest multiclass).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryBooster {
    pub base_score: f64,
    pub trees: Vec<GbdtNode>,
}

impl BinaryBooster {
    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.base_score + self.trees.iter().map(|t| t.score_for(row)).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub config: GbdtConfig,
    pub n_classes: usize,
    pub boosters: Vec<BinaryBooster>,
    /// Mean train log-loss after each round (first booster for multiclass).
    pub train_loss: Vec<f64>,
    pub validation_loss: Option<Vec<f64>>,
    /// Round kept by early stopping, when it triggered.
    pub best_iteration: Option<usize>,
}

impl GbdtModel {
    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        if self.n_classes == 2 {
            let p = math::sigmoid(self.boosters[0].raw_score(row));
            alloc::vec![1.0 - p, p]
        } else {
            let mut probs: Vec<f64> = self
                .boosters
                .iter()
                .map(|b| math::sigmoid(b.raw_score(row)))
                .collect();
            let sum: f64 = probs.iter().sum();
            for p in &mut probs {
                *p /= sum;
            }
            probs
        }
    }
}

/// Per-feature ascending cut points; bin `b` holds values `<= bounds[b]`, the
/// last bin is unbounded above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMapper {
    pub bounds: Vec<Vec<f64>>,
}

impl BinMapper {
    pub fn fit(x: &Matrix, n_bins: usize) -> BinMapper {
        let build = |j: usize| -> Vec<f64> {
            let mut vals = x.column(j);
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            // distinct values with multiplicities
            let mut distinct: Vec<(f64, usize)> = Vec::new();
            for &v in &vals {
                match distinct.last_mut() {
                    Some((last, c)) if *last == v => *c += 1,
                    _ => distinct.push((v, 1)),
                }
            }
            let mut bounds = Vec::new();
            if distinct.len() <= n_bins {
                // lossless: one bin per distinct value
                for w in distinct.windows(2) {
                    bounds.push(w[0].0 + (w[1].0 - w[0].0) / 2.0);
                }
            } else {
                let n = vals.len() as f64;
                let mut acc = 0usize;
                for w in distinct.windows(2) {
                    acc += w[0].1;
                    if acc as f64 >= (bounds.len() + 1) as f64 * n / n_bins as f64 {
                        bounds.push(w[0].0 + (w[1].0 - w[0].0) / 2.0);
                        if bounds.len() == n_bins - 1 {
                            break;
                        }
                    }
                }
            }
            bounds
        };

        #[cfg(feature = "parallel")]
        let bounds: Vec<Vec<f64>> = {
            use rayon::prelude::*;
            (0..x.n_cols()).into_par_iter().map(build).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let bounds: Vec<Vec<f64>> = (0..x.n_cols()).map(build).collect();

        BinMapper { bounds }
    }

    pub fn bin_of(&self, feature: usize, value: f64) -> usize {
        self.bounds[feature].partition_point(|&b| b < value)
    }

    /// Row-major binned copy of `x`.
    pub fn apply(&self, x: &Matrix) -> Vec<u8> {
        let mut out = Vec::with_capacity(x.n_rows() * x.n_cols());
        for i in 0..x.n_rows() {
            for (j, &v) in x.row(i).iter().enumerate() {
                out.push(self.bin_of(j, v) as u8);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Default)]
struct BinStat {
    g: f64,
    h: f64,
    count: u32,
}

struct TreeBuilder<'a> {
    binned: &'a [u8],
    n_features: usize,
    bins_per_feature: Vec<usize>,
    grad: &'a [f64],
    hess: &'a [f64],
    lambda: f64,
}

#[derive(Clone, Copy)]
struct SplitChoice {
    gain: f64,
    feature: usize,
    bin: usize,
}

impl<'a> TreeBuilder<'a> {
    fn sums(&self, indices: &[usize]) -> (f64, f64) {
        let mut g = 0.0;
        let mut h = 0.0;
        for &i in indices {
            g += self.grad[i];
            h += self.hess[i];
        }
        (g, h)
    }

    fn leaf_value(&self, g: f64, h: f64) -> f64 {
        -g / (h + self.lambda)
    }

    /// Best positive-gain split over all (feature, bin) candidates;
    /// first-found wins ties, i.e. lowest feature then lowest threshold.
    fn best_split(&self, indices: &[usize], g_total: f64, h_total: f64) -> Option<SplitChoice> {
        let max_bins = self.bins_per_feature.iter().max().copied().unwrap_or(1);
        let mut hist = alloc::vec![BinStat::default(); self.n_features * max_bins];
        for &i in indices {
            let row = &self.binned[i * self.n_features..(i + 1) * self.n_features];
            for (f, &b) in row.iter().enumerate() {
                let stat = &mut hist[f * max_bins + b as usize];
                stat.g += self.grad[i];
                stat.h += self.hess[i];
                stat.count += 1;
            }
        }
        let parent = g_total * g_total / (h_total + self.lambda);
        let n_total = indices.len() as u32;
        let mut best: Option<SplitChoice> = None;
        for f in 0..self.n_features {
            let mut gl = 0.0;
            let mut hl = 0.0;
            let mut cl = 0u32;
            // last bin can never be a split point
            for b in 0..self.bins_per_feature[f].saturating_sub(1) {
                let stat = hist[f * max_bins + b];
                gl += stat.g;
                hl += stat.h;
                cl += stat.count;
                if cl == 0 {
                    continue;
                }
                if cl == n_total {
                    break;
                }
                let gr = g_total - gl;
                let hr = h_total - hl;
                let gain = 0.5
                    * (gl * gl / (hl + self.lambda) + gr * gr / (hr + self.lambda) - parent);
                if gain > best.map_or(0.0, |s| s.gain) {
                    best = Some(SplitChoice { gain, feature: f, bin: b });
                }
            }
        }
        best
    }

    fn partition(&self, indices: &[usize], feature: usize, bin: usize) -> (Vec<usize>, Vec<usize>) {
        indices
            .iter()
            .partition(|&&i| usize::from(self.binned[i * self.n_features + feature]) <= bin)
    }
}

struct ArenaNode {
    feature: Option<usize>,
    threshold: f64,
    left: usize,
    right: usize,
    value: f64,
}

fn arena_to_node(arena: &[ArenaNode], id: usize, bounds: &[Vec<f64>]) -> GbdtNode {
    let n = &arena[id];
    match n.feature {
        None => GbdtNode::Leaf { value: n.value },
        Some(f) => GbdtNode::Split {
            feature: f,
            threshold: bounds[f][n.threshold as usize],
            left: Box::new(arena_to_node(arena, n.left, bounds)),
            right: Box::new(arena_to_node(arena, n.right, bounds)),
        },
    }
}

fn grow_depth_wise(
    builder: &TreeBuilder,
    arena: &mut Vec<ArenaNode>,
    indices: Vec<usize>,
    depth: usize,
    max_depth: usize,
    shrinkage: f64,
) -> usize {
    let (g, h) = builder.sums(&indices);
    let choice = if depth < max_depth && indices.len() >= 2 {
        builder.best_split(&indices, g, h)
    } else {
        None
    };
    match choice {
        None => {
            arena.push(ArenaNode {
                feature: None,
                threshold: 0.0,
                left: 0,
                right: 0,
                value: shrinkage * builder.leaf_value(g, h),
            });
            arena.len() - 1
        }
        Some(s) => {
            let (li, ri) = builder.partition(&indices, s.feature, s.bin);
            let left = grow_depth_wise(builder, arena, li, depth + 1, max_depth, shrinkage);
            let right = grow_depth_wise(builder, arena, ri, depth + 1, max_depth, shrinkage);
            arena.push(ArenaNode {
                feature: Some(s.feature),
                threshold: s.bin as f64,
                left,
                right,
                value: 0.0,
            });
            arena.len() - 1
        }
    }
}

struct OpenLeaf {
    arena_id: usize,
    indices: Vec<usize>,
    best: Option<SplitChoice>,
    born: usize,
}

fn grow_leaf_wise(
    builder: &TreeBuilder,
    arena: &mut Vec<ArenaNode>,
    indices: Vec<usize>,
    max_leaves: usize,
    shrinkage: f64,
) -> usize {
    let (g, h) = builder.sums(&indices);
    arena.push(ArenaNode {
        feature: None,
        threshold: 0.0,
        left: 0,
        right: 0,
        value: shrinkage * builder.leaf_value(g, h),
    });
    let root = arena.len() - 1;
    let best = builder.best_split(&indices, g, h);
    let mut open = alloc::vec![OpenLeaf {
        arena_id: root,
        indices,
        best,
        born: 0,
    }];
    let mut n_leaves = 1;
    let mut next_born = 1;
    while n_leaves < max_leaves {
        // best positive gain, ties to the earliest-created leaf
        let Some(pos) = open
            .iter()
            .enumerate()
            .filter(|(_, l)| l.best.is_some())
            .max_by(|(_, a), (_, b)| {
                let (ga, gb) = (a.best.unwrap().gain, b.best.unwrap().gain);
                ga.partial_cmp(&gb)
                    .unwrap()
                    .then(b.born.cmp(&a.born))
            })
            .map(|(i, _)| i)
        else {
            break;
        };
        let leaf = open.swap_remove(pos);
        let s = leaf.best.expect("filtered on is_some");
        let (li, ri) = builder.partition(&leaf.indices, s.feature, s.bin);
        let mut push_child = |indices: Vec<usize>, born: usize| -> usize {
            let (g, h) = builder.sums(&indices);
            arena.push(ArenaNode {
                feature: None,
                threshold: 0.0,
                left: 0,
                right: 0,
                value: shrinkage * builder.leaf_value(g, h),
            });
            let id = arena.len() - 1;
            let best = if indices.len() >= 2 {
                builder.best_split(&indices, g, h)
            } else {
                None
            };
            open.push(OpenLeaf {
                arena_id: id,
                indices,
                best,
                born,
            });
            id
        };
        let left = push_child(li, next_born);
        let right = push_child(ri, next_born + 1);
        next_born += 2;
        let parent = &mut arena[leaf.arena_id];
        parent.feature = Some(s.feature);
        parent.threshold = s.bin as f64;
        parent.left = left;
        parent.right = right;
        parent.value = 0.0;
        n_leaves += 1;
    }
    root
}

/// Mean weighted log-loss of raw scores.
fn log_loss(scores: &[f64], y: &[f64], weights: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&s, &t), &w) in scores.iter().zip(y).zip(weights) {
        num += w * (math::softplus(s) - t * s);
        den += w;
    }
    num / den
}

struct BinaryFit {
    booster: BinaryBooster,
    train_loss: Vec<f64>,
    val_loss: Option<Vec<f64>>,
    best_iteration: Option<usize>,
}

fn fit_binary(
    x: &Matrix,
    y01: &[f64],
    config: &GbdtConfig,
    mapper: &BinMapper,
    binned: &[u8],
    validation: Option<(&Matrix, &[f64])>,
) -> BinaryFit {
    let n = x.n_rows();
    let weights: Vec<f64> = y01
        .iter()
        .map(|&t| if t == 1.0 { config.scale_pos_weight } else { 1.0 })
        .collect();
    let wpos: f64 = weights
        .iter()
        .zip(y01)
        .map(|(&w, &t)| w * t)
        .sum();
    let wtot: f64 = weights.iter().sum();
    let prior = (wpos / wtot).clamp(1e-12, 1.0 - 1e-12);
    let base_score = math::ln(prior / (1.0 - prior));

    let mut scores = alloc::vec![base_score; n];
    let mut val_scores: Vec<f64> = validation
        .map(|(vx, _)| alloc::vec![base_score; vx.n_rows()])
        .unwrap_or_default();
    let val_weights: Vec<f64> = validation
        .map(|(_, vy)| {
            vy.iter()
                .map(|&t| if t == 1.0 { config.scale_pos_weight } else { 1.0 })
                .collect()
        })
        .unwrap_or_default();

    let bins_per_feature: Vec<usize> = mapper.bounds.iter().map(|b| b.len() + 1).collect();
    let mut trees = Vec::with_capacity(config.n_estimators);
    let mut train_loss = Vec::with_capacity(config.n_estimators);
    let mut val_loss: Vec<f64> = Vec::new();
    let mut grad = alloc::vec![0.0; n];
    let mut hess = alloc::vec![0.0; n];
    let mut best_round: Option<(usize, f64)> = None;
    let mut stopped_at: Option<usize> = None;

    for round in 0..config.n_estimators {
        for i in 0..n {
            let p = math::sigmoid(scores[i]);
            grad[i] = weights[i] * (p - y01[i]);
            hess[i] = weights[i] * p * (1.0 - p);
        }
        let builder = TreeBuilder {
            binned,
            n_features: x.n_cols(),
            bins_per_feature: bins_per_feature.clone(),
            grad: &grad,
            hess: &hess,
            lambda: config.l2_lambda,
        };
        let mut arena = Vec::new();
        let all: Vec<usize> = (0..n).collect();
        let root = match config.growth {
            Growth::DepthWise => grow_depth_wise(
                &builder,
                &mut arena,
                all,
                0,
                config.max_depth,
                config.learning_rate,
            ),
            Growth::LeafWise => grow_leaf_wise(
                &builder,
                &mut arena,
                all,
                config.max_leaves,
                config.learning_rate,
            ),
        };
        let tree = arena_to_node(&arena, root, &mapper.bounds);
        for (i, s) in scores.iter_mut().enumerate() {
            *s += tree.score_for(x.row(i));
        }
        train_loss.push(log_loss(&scores, y01, &weights));
        if let Some((vx, vy)) = validation {
            for (i, s) in val_scores.iter_mut().enumerate() {
                *s += tree.score_for(vx.row(i));
            }
            let loss = log_loss(&val_scores, vy, &val_weights);
            val_loss.push(loss);
            if best_round.map_or(true, |(_, best)| loss < best) {
                best_round = Some((round, loss));
            }
            if let (Some(patience), Some((br, _))) = (config.early_stopping_rounds, best_round) {
                if round - br >= patience {
                    stopped_at = Some(br);
                    trees.push(tree);
                    break;
                }
            }
        }
        trees.push(tree);
    }

    if let Some(best) = stopped_at {
        trees.truncate(best + 1);
        train_loss.truncate(best + 1);
        val_loss.truncate(best + 1);
    }
    BinaryFit {
        booster: BinaryBooster {
            base_score,
            trees,
        },
        train_loss,
        val_loss: validation.map(|_| val_loss),
        best_iteration: stopped_at,
    }
}

/// Fit a gradient-boosted model. `validation` enables loss tracking and early
/// stopping. Deterministic: there is no subsampling, so the result depends
/// only on data and config.
pub fn fit_gbdt(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    config: &GbdtConfig,
    validation: Option<(&Matrix, &[usize])>,
) -> Result<GbdtModel> {
    config.validate()?;
    if x.is_empty() {
        return Err(Error::EmptyInput("fit_gbdt"));
    }
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    let first = y[0];
    if y.iter().all(|&c| c == first) {
        return Err(Error::SingleClass("fit_gbdt"));
    }
    if n_classes < 2 {
        return Err(Error::InvalidParam("n_classes must be >= 2".into()));
    }

    let mapper = BinMapper::fit(x, config.n_bins);
    let binned = mapper.apply(x);

    let indicator = |class: usize, labels: &[usize]| -> Vec<f64> {
        labels
            .iter()
            .map(|&c| if c == class { 1.0 } else { 0.0 })
            .collect()
    };

    let fits: Vec<BinaryFit> = if n_classes == 2 {
        let y01 = indicator(1, y);
        let vy01 = validation.map(|(_, vy)| indicator(1, vy));
        alloc::vec![fit_binary(
            x,
            &y01,
            config,
            &mapper,
            &binned,
            validation.map(|(vx, _)| (vx, vy01.as_deref().unwrap())),
        )]
    } else {
        let run = |class: usize| {
            let y01 = indicator(class, y);
            let vy01 = validation.map(|(_, vy)| indicator(class, vy));
            fit_binary(
                x,
                &y01,
                config,
                &mapper,
                &binned,
                validation.map(|(vx, _)| (vx, vy01.as_deref().unwrap())),
            )
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            (0..n_classes).into_par_iter().map(run).collect()
        }
        #[cfg(not(feature = "parallel"))]
        (0..n_classes).map(run).collect()
    };

    let mut fits = fits;
    let first = fits.remove(0);
    let mut boosters = alloc::vec![first.booster];
    boosters.extend(fits.into_iter().map(|f| f.booster));
    Ok(GbdtModel {
        config: config.clone(),
        n_classes,
        boosters,
        train_loss: first.train_loss,
        validation_loss: first.val_loss,
        best_iteration: first.best_iteration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn toy() -> (Matrix, Vec<usize>) {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![i as f64, ((i * 3) % 11) as f64])
            .collect();
        let y: Vec<usize> = (0..30).map(|i| usize::from(i >= 13)).collect();
        (Matrix::from_rows(&rows), y)
    }

    #[test]
    fn zero_learning_rate_predicts_the_prior() {
        let (x, y) = toy();
        let cfg = GbdtConfig {
            learning_rate: 0.0,
            n_estimators: 5,
            ..Default::default()
        };
        let model = fit_gbdt(&x, &y, 2, &cfg, None).unwrap();
        let prior = 17.0 / 30.0;
        for i in 0..x.n_rows() {
            let p = model.predict_proba_row(x.row(i));
            assert!((p[1] - prior).abs() < 1e-12, "{} vs {prior}", p[1]);
        }
    }

    #[test]
    fn train_loss_is_monotone_nonincreasing() {
        let (x, y) = toy();
        for growth in [Growth::DepthWise, Growth::LeafWise] {
            let cfg = GbdtConfig {
                growth,
                n_estimators: 40,
                learning_rate: 0.1,
                ..Default::default()
            };
            let model = fit_gbdt(&x, &y, 2, &cfg, None).unwrap();
            for w in model.train_loss.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "loss rose: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0]]);
        assert!(matches!(
            fit_gbdt(&x, &[1, 1], 2, &GbdtConfig::default(), None),
            Err(Error::SingleClass(_))
        ));
    }

    #[test]
    fn probabilities_use_the_logistic_link() {
        let (x, y) = toy();
        let model = fit_gbdt(&x, &y, 2, &GbdtConfig::default(), None).unwrap();
        for i in 0..x.n_rows() {
            let raw = model.boosters[0].raw_score(x.row(i));
            let p = model.predict_proba_row(x.row(i));
            assert!((p[1] - math::sigmoid(raw)).abs() <= 1e-15);
            assert!((p[0] + p[1] - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn early_stopping_truncates_to_best_round() {
        let (x, y) = toy();
        // validation deliberately tiny and noisy so stopping kicks in
        let vx = Matrix::from_rows(&[vec![2.0, 1.0], vec![25.0, 4.0], vec![4.0, 9.0]]);
        let vy = vec![1, 0, 1];
        let cfg = GbdtConfig {
            n_estimators: 200,
            early_stopping_rounds: Some(5),
            ..Default::default()
        };
        let model = fit_gbdt(&x, &y, 2, &cfg, Some((&vx, &vy))).unwrap();
        if let Some(best) = model.best_iteration {
            assert_eq!(model.boosters[0].trees.len(), best + 1);
            let vl = model.validation_loss.as_ref().unwrap();
            assert_eq!(vl.len(), best + 1);
        }
    }

    #[test]
    fn leaf_wise_respects_max_leaves() {
        let (x, y) = toy();
        let cfg = GbdtConfig {
            growth: Growth::LeafWise,
            max_leaves: 4,
            n_estimators: 3,
            ..Default::default()
        };
        let model = fit_gbdt(&x, &y, 2, &cfg, None).unwrap();
        fn count_leaves(n: &GbdtNode) -> usize {
            match n {
                GbdtNode::Leaf { .. } => 1,
                GbdtNode::Split { left, right, .. } => count_leaves(left) + count_leaves(right),
            }
        }
        for tree in &model.boosters[0].trees {
            assert!(count_leaves(tree) <= 4);
        }
    }

    #[test]
    fn three_class_probabilities_normalize() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let y: Vec<usize> = (0..30).map(|i| i / 10).collect();
        let x = Matrix::from_rows(&rows);
        let model = fit_gbdt(&x, &y, 3, &GbdtConfig::default(), None).unwrap();
        for i in 0..x.n_rows() {
            let p = model.predict_proba_row(x.row(i));
            assert_eq!(p.len(), 3);
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
        // the planted structure should be learnable
        let correct = (0..30)
            .filter(|&i| crate::tree::argmax(&model.predict_proba_row(x.row(i))) == y[i])
            .count();
        assert!(correct >= 27, "{correct}/30");
    }
}
