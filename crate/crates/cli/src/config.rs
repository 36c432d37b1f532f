//! Pipeline configuration: one flat plain-text file of dotted keys
//! (`join.radius_km = 5.0`, `#` comments), overridable from the command line.
//! Every run is fully described by (config, inputs, seed).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use pyrocast_core::date::Date;
use pyrocast_core::features::{FeatureConfig, LabelScheme, SplitSpec};
use pyrocast_core::forest::ForestConfig;
use pyrocast_core::fuse::FuseConfig;
use pyrocast_core::gbdt::{GbdtConfig, Growth};
use pyrocast_core::linear::LogisticConfig;
use pyrocast_core::mlp::{Activation, MlpConfig};
use pyrocast_core::resample::{ResampleConfig, TomekPolicy};
use pyrocast_core::search::{Scoring, SearchSpec};
use pyrocast_core::stack::StackConfig;
use pyrocast_core::tree::{ClassWeights, TreeConfig};

use crate::{PipelineError, Result};

/// Raw `key = value` map parsed from a config file.
pub fn parse_key_values(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(PipelineError::Schema(format!(
                "{}:{}: expected `key = value`, got `{line}`",
                origin.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Fully resolved configuration for every stage.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub fire_path: Option<PathBuf>,
    pub weather_path: Option<PathBuf>,
    pub ndvi_path: Option<PathBuf>,
    pub study_start: Date,
    pub study_end: Date,
    pub fuse: FuseConfig,
    pub label: LabelScheme,
    pub features: FeatureConfig,
    pub test_fraction: f64,
    pub resample_enabled: bool,
    pub resample: ResampleConfig,
    pub search_enabled: bool,
    pub search: SearchSpec,
    /// Model families the train stage fits.
    pub train_models: Vec<String>,
    pub threshold_enabled: bool,
    pub stack_n_folds: usize,
    pub forest: ForestConfig,
    pub gbdt: GbdtConfig,
    pub mlp: MlpConfig,
    pub logistic: LogisticConfig,
    pub tree: TreeConfig,
    pub synth_n: usize,
    pub synth_ratio: f64,
    pub synth_signal: f64,
    pub seed: u64,
    pub threads: usize,
    pub out_dir: PathBuf,
    /// Canonical `key = value` lines actually in effect, for hashing.
    pub resolved: BTreeMap<String, String>,
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub fire: Option<PathBuf>,
    pub weather: Option<PathBuf>,
    pub ndvi: Option<PathBuf>,
    pub synth_n: Option<usize>,
    pub synth_ratio: Option<f64>,
    pub synth_signal: Option<f64>,
}

const KNOWN_KEYS: &[&str] = &[
    "inputs.fire",
    "inputs.weather",
    "inputs.ndvi",
    "study.start",
    "study.end",
    "join.radius_km",
    "join.idw_power",
    "join.ndvi_window_days",
    "join.ndvi_max_km",
    "label.scheme",
    "label.threshold",
    "label.t1",
    "label.t2",
    "features.include_raw_weather",
    "features.cap_quantile",
    "split.test_fraction",
    "resample.enabled",
    "resample.k_neighbors",
    "resample.target_ratio",
    "resample.policy",
    "search.enabled",
    "search.n_iter",
    "search.n_folds",
    "search.scoring",
    "train.models",
    "threshold.enabled",
    "stack.n_folds",
    "forest.n_trees",
    "forest.max_depth",
    "forest.min_samples_leaf",
    "forest.balanced",
    "gbdt.n_estimators",
    "gbdt.learning_rate",
    "gbdt.max_depth",
    "gbdt.max_leaves",
    "gbdt.l2_lambda",
    "gbdt.n_bins",
    "mlp.hidden_layers",
    "mlp.activation",
    "mlp.l2_alpha",
    "mlp.learning_rate",
    "mlp.batch_size",
    "mlp.max_epochs",
    "logistic.l2",
    "tree.max_depth",
    "tree.min_samples_leaf",
    "synth.n",
    "synth.ratio",
    "synth.signal",
    "seed",
    "threads",
    "out",
];

fn parse_date(s: &str, key: &str) -> Result<Date> {
    let d = NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| PipelineError::Schema(format!("{key}: bad date `{s}`: {e}")))?;
    use chrono::Datelike;
    Ok(Date::from_ymd(d.year(), d.month(), d.day()))
}

struct Getter<'a> {
    map: &'a BTreeMap<String, String>,
}

impl<'a> Getter<'a> {
    fn parse<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.get(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|e| {
                PipelineError::Schema(format!("config key `{key}`: bad value `{raw}`: {e}"))
            }),
        }
    }

    fn string(&self, key: &str, default: &str) -> String {
        self.map.get(key).cloned().unwrap_or_else(|| default.to_string())
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.map.get(key).map(PathBuf::from)
    }
}

impl PipelineConfig {
    /// Resolve a config map plus command-line overrides into a full config.
    pub fn resolve(mut map: BTreeMap<String, String>, overrides: &Overrides) -> Result<PipelineConfig> {
        for key in map.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                eprintln!("warning: unknown config key `{key}` ignored");
            }
        }
        let mut set = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                map.insert(k.to_string(), v);
            }
        };
        set("seed", overrides.seed.map(|v| v.to_string()));
        set("threads", overrides.threads.map(|v| v.to_string()));
        set("out", overrides.out.as_ref().map(|p| p.display().to_string()));
        set("inputs.fire", overrides.fire.as_ref().map(|p| p.display().to_string()));
        set(
            "inputs.weather",
            overrides.weather.as_ref().map(|p| p.display().to_string()),
        );
        set("inputs.ndvi", overrides.ndvi.as_ref().map(|p| p.display().to_string()));
        set("synth.n", overrides.synth_n.map(|v| v.to_string()));
        set("synth.ratio", overrides.synth_ratio.map(|v| v.to_string()));
        set("synth.signal", overrides.synth_signal.map(|v| v.to_string()));

        let g = Getter { map: &map };

        let seed: u64 = match map.get("seed") {
            Some(raw) => raw.parse().map_err(|e| {
                PipelineError::Schema(format!("config key `seed`: bad value `{raw}`: {e}"))
            })?,
            None => {
                return Err(PipelineError::Validation(
                    "a seed is mandatory: set `seed = <u64>` in the config or pass --seed".into(),
                ))
            }
        };

        let label = match g.string("label.scheme", "two_class").as_str() {
            "two_class" => LabelScheme::TwoClass {
                threshold: g.parse("label.threshold", 40.0)?,
            },
            "three_class" => LabelScheme::ThreeClass {
                t1: g.parse("label.t1", 40.0)?,
                t2: g.parse("label.t2", 100.0)?,
            },
            other => {
                return Err(PipelineError::Schema(format!(
                    "label.scheme must be two_class or three_class, got `{other}`"
                )))
            }
        };
        label.validate()?;

        let policy = match g.string("resample.policy", "majority_only").as_str() {
            "majority_only" => TomekPolicy::RemoveMajorityOnly,
            "both" => TomekPolicy::RemoveBoth,
            other => {
                return Err(PipelineError::Schema(format!(
                    "resample.policy must be majority_only or both, got `{other}`"
                )))
            }
        };
        let scoring = match g.string("search.scoring", "macro_f1").as_str() {
            "macro_f1" => Scoring::MacroF1,
            "high_recall" => Scoring::HighRecall,
            "accuracy" => Scoring::Accuracy,
            other => {
                return Err(PipelineError::Schema(format!(
                    "search.scoring must be macro_f1, high_recall, or accuracy, got `{other}`"
                )))
            }
        };
        let activation = match g.string("mlp.activation", "relu").as_str() {
            "relu" => Activation::Relu,
            "tanh" => Activation::Tanh,
            other => {
                return Err(PipelineError::Schema(format!(
                    "mlp.activation must be relu or tanh, got `{other}`"
                )))
            }
        };
        let hidden_layers: Vec<usize> = g
            .string("mlp.hidden_layers", "100,100,50")
            .split(',')
            .map(|s| {
                s.trim().parse().map_err(|e| {
                    PipelineError::Schema(format!("mlp.hidden_layers: bad width `{s}`: {e}"))
                })
            })
            .collect::<Result<_>>()?;
        let train_models: Vec<String> = g
            .string("train.models", "stack")
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        for family in &train_models {
            const FAMILIES: &[&str] = &[
                "tree",
                "forest",
                "gbdt_depthwise",
                "gbdt_leafwise",
                "logistic",
                "mlp",
                "stack",
            ];
            if !FAMILIES.contains(&family.as_str()) {
                return Err(PipelineError::Schema(format!(
                    "train.models: unknown family `{family}` (expected one of {FAMILIES:?})"
                )));
            }
        }

        let config = PipelineConfig {
            fire_path: g.path("inputs.fire"),
            weather_path: g.path("inputs.weather"),
            ndvi_path: g.path("inputs.ndvi"),
            study_start: parse_date(&g.string("study.start", "2015-01-01"), "study.start")?,
            study_end: parse_date(&g.string("study.end", "2023-12-31"), "study.end")?,
            fuse: FuseConfig {
                radius_km: g.parse("join.radius_km", 5.0)?,
                idw_power: g.parse("join.idw_power", 2.0)?,
                ndvi_window_days: g.parse("join.ndvi_window_days", 8)?,
                ndvi_max_km: g.parse("join.ndvi_max_km", 2.5)?,
            },
            label,
            features: FeatureConfig {
                include_raw_weather: g.parse("features.include_raw_weather", false)?,
                cap_quantile: g.parse("features.cap_quantile", 0.99)?,
            },
            test_fraction: g.parse("split.test_fraction", 0.2)?,
            resample_enabled: g.parse("resample.enabled", false)?,
            resample: ResampleConfig {
                k_neighbors: g.parse("resample.k_neighbors", 5)?,
                target_ratio: g.parse("resample.target_ratio", 1.0)?,
                tomek_policy: policy,
                seed: 0, // derived from the run seed at use sites
            },
            search_enabled: g.parse("search.enabled", false)?,
            search: SearchSpec {
                n_iter: g.parse("search.n_iter", 20)?,
                n_folds: g.parse("search.n_folds", 3)?,
                scoring,
                seed: 0,
            },
            train_models,
            threshold_enabled: g.parse("threshold.enabled", true)?,
            stack_n_folds: g.parse("stack.n_folds", 5)?,
            forest: ForestConfig {
                n_trees: g.parse("forest.n_trees", 100)?,
                max_depth: g.parse("forest.max_depth", 16)?,
                min_samples_leaf: g.parse("forest.min_samples_leaf", 1)?,
                class_weights: if g.parse("forest.balanced", false)? {
                    ClassWeights::Balanced
                } else {
                    ClassWeights::Uniform
                },
                ..Default::default()
            },
            gbdt: GbdtConfig {
                n_estimators: g.parse("gbdt.n_estimators", 100)?,
                learning_rate: g.parse("gbdt.learning_rate", 0.1)?,
                max_depth: g.parse("gbdt.max_depth", 6)?,
                max_leaves: g.parse("gbdt.max_leaves", 31)?,
                l2_lambda: g.parse("gbdt.l2_lambda", 1.0)?,
                n_bins: g.parse("gbdt.n_bins", 255)?,
                ..Default::default()
            },
            mlp: MlpConfig {
                hidden_layers,
                activation,
                l2_alpha: g.parse("mlp.l2_alpha", 1e-4)?,
                learning_rate: g.parse("mlp.learning_rate", 1e-3)?,
                batch_size: g.parse("mlp.batch_size", 64)?,
                max_epochs: g.parse("mlp.max_epochs", 30)?,
                seed: 0,
            },
            logistic: LogisticConfig {
                l2: g.parse("logistic.l2", 1e-4)?,
                ..Default::default()
            },
            tree: TreeConfig {
                max_depth: g.parse("tree.max_depth", 16)?,
                min_samples_leaf: g.parse("tree.min_samples_leaf", 1)?,
                class_weights: ClassWeights::Uniform,
            },
            synth_n: g.parse("synth.n", 52_116)?,
            synth_ratio: g.parse("synth.ratio", 0.053)?,
            synth_signal: g.parse("synth.signal", 1.0)?,
            seed,
            threads: g.parse("threads", 1)?,
            out_dir: g.path("out").unwrap_or_else(|| PathBuf::from("out")),
            resolved: map,
        };

        if config.study_start >= config.study_end {
            return Err(PipelineError::Validation(
                "study.start must precede study.end".into(),
            ));
        }
        if !(config.test_fraction > 0.0 && config.test_fraction < 1.0) {
            return Err(PipelineError::Validation(
                "split.test_fraction must be in (0,1)".into(),
            ));
        }
        if !(config.synth_ratio > 0.0 && config.synth_ratio < 1.0) {
            return Err(PipelineError::Validation("synth.ratio must be in (0,1)".into()));
        }
        Ok(config)
    }

    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<PipelineConfig> {
        let map = match path {
            None => BTreeMap::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(PipelineError::io(p))?;
                parse_key_values(&text, p)?
            }
        };
        PipelineConfig::resolve(map, overrides)
    }

    /// Canonical text of the resolved key/value map.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.resolved {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            test_fraction: self.test_fraction,
            seed: pyrocast_core::seeding::derive(self.seed, 0xF0),
        }
    }

    /// Stack assembled from the per-family configs.
    pub fn stack_config(&self) -> StackConfig {
        StackConfig {
            bases: vec![
                pyrocast_core::model::ModelConfig::Forest(self.forest.clone()),
                pyrocast_core::model::ModelConfig::Gbdt(GbdtConfig {
                    growth: Growth::LeafWise,
                    ..self.gbdt.clone()
                }),
            ],
            meta: self.logistic.clone(),
            n_folds: self.stack_n_folds,
            seed: 0,
        }
    }

    pub fn model_config(&self, family: &str) -> Result<pyrocast_core::model::ModelConfig> {
        use pyrocast_core::model::ModelConfig;
        Ok(match family {
            "tree" => ModelConfig::Tree(self.tree.clone()),
            "forest" => ModelConfig::Forest(self.forest.clone()),
            "gbdt_depthwise" => ModelConfig::Gbdt(GbdtConfig {
                growth: Growth::DepthWise,
                ..self.gbdt.clone()
            }),
            "gbdt_leafwise" => ModelConfig::Gbdt(GbdtConfig {
                growth: Growth::LeafWise,
                ..self.gbdt.clone()
            }),
            "logistic" => ModelConfig::Logistic(self.logistic.clone()),
            "mlp" => ModelConfig::Mlp(self.mlp.clone()),
            "stack" => ModelConfig::Stack(self.stack_config()),
            other => {
                return Err(PipelineError::Schema(format!("unknown model family `{other}`")))
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_with_just_a_seed() {
        let cfg = PipelineConfig::resolve(
            BTreeMap::new(),
            &Overrides {
                seed: Some(7),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(cfg.fuse.radius_km, 5.0);
        assert_eq!(cfg.test_fraction, 0.2);
        assert_eq!(cfg.label, LabelScheme::TwoClass { threshold: 40.0 });
        assert_eq!(cfg.train_models, vec!["stack".to_string()]);
    }

    #[test]
    fn missing_seed_is_a_validation_error() {
        let err = PipelineConfig::resolve(BTreeMap::new(), &Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn file_keys_and_overrides_compose() {
        let text = "join.radius_km = 7.5\nseed = 1\n# comment\nmlp.hidden_layers = 10, 5\n";
        let map = parse_key_values(text, Path::new("test.conf")).unwrap();
        let cfg = PipelineConfig::resolve(
            map,
            &Overrides {
                seed: Some(9),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(cfg.fuse.radius_km, 7.5);
        assert_eq!(cfg.seed, 9); // override wins
        assert_eq!(cfg.mlp.hidden_layers, vec![10, 5]);
    }

    #[test]
    fn bad_values_are_schema_errors() {
        let map = parse_key_values("seed = 1\ngbdt.n_bins = many\n", Path::new("c")).unwrap();
        let err = PipelineConfig::resolve(map, &Overrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
