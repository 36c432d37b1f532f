//! Uniform fit/predict-probability facade over all learner families, plus the
//! serializable model artifact with its feature-manifest guard.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureManifest, Matrix};
use crate::forest::{fit_forest, ForestConfig, RandomForest};
use crate::gbdt::{fit_gbdt, GbdtConfig, GbdtModel, Growth};
use crate::linear::{fit_logistic, LogisticConfig, LogisticModel};
use crate::mlp::{fit_mlp, MlpConfig, MlpModel};
use crate::stack::{fit_stack, StackConfig, StackModel};
use crate::tree::{argmax, fit_tree, DecisionTree, TreeConfig};
use crate::{Error, Result};

/// Configuration for any learner family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelConfig {
    Tree(TreeConfig),
    Forest(ForestConfig),
    Gbdt(GbdtConfig),
    Logistic(LogisticConfig),
    Mlp(MlpConfig),
    Stack(StackConfig),
}

impl ModelConfig {
    pub fn family(&self) -> &'static str {
        match self {
            ModelConfig::Tree(_) => "tree",
            ModelConfig::Forest(_) => "forest",
            ModelConfig::Gbdt(c) => match c.growth {
                Growth::DepthWise => "gbdt_depthwise",
                Growth::LeafWise => "gbdt_leafwise",
            },
            ModelConfig::Logistic(_) => "logistic",
            ModelConfig::Mlp(_) => "mlp",
            ModelConfig::Stack(_) => "stack",
        }
    }

    /// Copy with every internal seed replaced; families without randomness
    /// are returned unchanged.
    pub fn with_seed(&self, seed: u64) -> ModelConfig {
        match self {
            ModelConfig::Forest(c) => ModelConfig::Forest(ForestConfig { seed, ..c.clone() }),
            ModelConfig::Mlp(c) => ModelConfig::Mlp(MlpConfig { seed, ..c.clone() }),
            ModelConfig::Stack(c) => ModelConfig::Stack(StackConfig { seed, ..c.clone() }),
            other => other.clone(),
        }
    }
}

/// A fitted model of any family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Tree(DecisionTree),
    Forest(RandomForest),
    Gbdt(GbdtModel),
    Logistic(LogisticModel),
    Mlp(MlpModel),
    Stack(StackModel),
}

impl Model {
    pub fn n_classes(&self) -> usize {
        match self {
            Model::Tree(m) => m.n_classes,
            Model::Forest(m) => m.n_classes,
            Model::Gbdt(m) => m.n_classes,
            Model::Logistic(m) => m.n_classes,
            Model::Mlp(m) => m.n_classes,
            Model::Stack(m) => m.n_classes,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Model::Tree(_) => "tree",
            Model::Forest(_) => "forest",
            Model::Gbdt(m) => match m.config.growth {
                Growth::DepthWise => "gbdt_depthwise",
                Growth::LeafWise => "gbdt_leafwise",
            },
            Model::Logistic(_) => "logistic",
            Model::Mlp(_) => "mlp",
            Model::Stack(_) => "stack",
        }
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        match self {
            Model::Tree(m) => m.predict_proba_row(row),
            Model::Forest(m) => m.predict_proba_row(row),
            Model::Gbdt(m) => m.predict_proba_row(row),
            Model::Logistic(m) => m.predict_proba_row(row),
            Model::Mlp(m) => m.predict_proba_row(row),
            Model::Stack(m) => m.predict_proba_row(row),
        }
    }

    /// Per-class probabilities, one row per input row; rows sum to one and
    /// columns follow the artifact class order.
    pub fn predict_proba(&self, x: &Matrix) -> Matrix {
        let k = self.n_classes();
        let mut out = Matrix::zeros(x.n_rows(), k);
        for i in 0..x.n_rows() {
            let p = self.predict_proba_row(x.row(i));
            out.row_mut(i).copy_from_slice(&p);
        }
        out
    }

    pub fn predict(&self, x: &Matrix) -> Vec<usize> {
        (0..x.n_rows())
            .map(|i| argmax(&self.predict_proba_row(x.row(i))))
            .collect()
    }
}

/// Fit any family with one call. `Stack` configs fit without fold-internal
/// resampling here; use [`fit_stack`] directly to resample inside folds.
pub fn fit_model(config: &ModelConfig, x: &Matrix, y: &[usize], n_classes: usize) -> Result<Model> {
    Ok(match config {
        ModelConfig::Tree(c) => Model::Tree(fit_tree(x, y, n_classes, c)?),
        ModelConfig::Forest(c) => Model::Forest(fit_forest(x, y, n_classes, c)?),
        ModelConfig::Gbdt(c) => Model::Gbdt(fit_gbdt(x, y, n_classes, c, None)?),
        ModelConfig::Logistic(c) => Model::Logistic(fit_logistic(x, y, n_classes, c)?),
        ModelConfig::Mlp(c) => Model::Mlp(fit_mlp(x, y, n_classes, c)?),
        ModelConfig::Stack(c) => Model::Stack(fit_stack(x, y, n_classes, c, None)?.model),
    })
}

pub const ARTIFACT_SCHEMA_VERSION: u32 = 1;

/// A fitted model with everything needed to apply it safely later: the
/// feature manifest it was trained on, its class list, and the decision
/// threshold chosen on validation data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub schema_version: u32,
    pub family: String,
    pub classes: Vec<String>,
    pub manifest: FeatureManifest,
    pub manifest_hash: u64,
    /// Probability-of-last-class cut for binary decisions.
    pub threshold: Option<f64>,
    pub warnings: Vec<String>,
    pub model: Model,
}

impl ModelArtifact {
    pub fn new(model: Model, manifest: FeatureManifest, classes: Vec<String>) -> Self {
        let mut warnings = Vec::new();
        if let Model::Logistic(m) = &model {
            if !m.converged {
                warnings.push(String::from("logistic regression did not converge"));
            }
        }
        ModelArtifact {
            schema_version: ARTIFACT_SCHEMA_VERSION,
            family: String::from(model.family()),
            classes,
            manifest_hash: manifest.hash(),
            manifest,
            threshold: None,
            warnings,
            model,
        }
    }

    fn check_manifest(&self, manifest: &FeatureManifest) -> Result<()> {
        if manifest.hash() != self.manifest_hash {
            return Err(Error::ManifestMismatch {
                expected: self.manifest.names.join(","),
                got: manifest.names.join(","),
            });
        }
        self.manifest.check_matches(manifest)
    }

    /// Probabilities for `x`, rejecting a mismatched feature manifest.
    pub fn predict_proba(&self, x: &Matrix, manifest: &FeatureManifest) -> Result<Matrix> {
        self.check_manifest(manifest)?;
        Ok(self.model.predict_proba(x))
    }

    /// Hard classes for `x`: argmax, or the stored threshold on the last
    /// class's probability for binary models that carry one.
    pub fn predict(&self, x: &Matrix, manifest: &FeatureManifest) -> Result<Vec<usize>> {
        self.check_manifest(manifest)?;
        let probs = self.model.predict_proba(x);
        Ok(match (self.threshold, self.model.n_classes()) {
            (Some(t), 2) => (0..probs.n_rows())
                .map(|i| usize::from(probs.get(i, 1) >= t))
                .collect(),
            _ => (0..probs.n_rows()).map(|i| argmax(probs.row(i))).collect(),
        })
    }
}
