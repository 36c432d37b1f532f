//! Stage orchestration: ingest -> fuse -> featurize -> train -> evaluate,
//! plus predict, synth, and report. Every stage reads the previous stage's
//! files from the output directory, writes its own, and appends a record to
//! `manifest.json`. All randomness is derived from the single run seed, so a
//! (config, inputs, seed) triple pins every output byte of the metric
//! reports regardless of thread count.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pyrocast_core::dataset::Matrix;
use pyrocast_core::features;
use pyrocast_core::fuse;
use pyrocast_core::metrics;
use pyrocast_core::model::{fit_model, Model, ModelArtifact, ModelConfig};
use pyrocast_core::resample::{smote_tomek, ResampleConfig};
use pyrocast_core::search::{random_search, GbdtSpace, SearchSpace, SearchSpec};
use pyrocast_core::seeding;
use pyrocast_core::stack::fit_stack;
use pyrocast_core::threshold::optimize_threshold;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::PipelineConfig;
use crate::formats::{self, FeatureFile, FeaturizeModel, FileDigest, RunManifest, StageRecord};
use crate::ingest;
use crate::report::{correlation_svg, render_report_table};
use crate::synth::{self, SynthSpec};
use crate::{PipelineError, Result};

/// Model families the train stage understands, in seed-derivation order.
const FAMILIES: &[&str] = &[
    "tree",
    "forest",
    "gbdt_depthwise",
    "gbdt_leafwise",
    "logistic",
    "mlp",
    "stack",
];

fn family_seed(cfg: &PipelineConfig, family: &str) -> u64 {
    let idx = FAMILIES.iter().position(|f| *f == family).unwrap_or(99);
    seeding::derive(cfg.seed, 0x100 + idx as u64)
}

fn require(path: PathBuf, produced_by: &str) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(PipelineError::Validation(format!(
            "missing prerequisite {}: run `{produced_by}` first",
            path.display()
        )))
    }
}

fn record_stage(
    cfg: &PipelineConfig,
    stage: &str,
    inputs: Vec<FileDigest>,
    rows_in: usize,
    rows_out: usize,
    detail: BTreeMap<String, serde_json::Value>,
    artifacts: Vec<String>,
    started: Instant,
) -> Result<()> {
    RunManifest::append(
        &cfg.out_dir,
        StageRecord {
            stage: stage.to_string(),
            config_hash: formats::sha256_text(&cfg.canonical_text()),
            inputs,
            rows_in,
            rows_out,
            detail,
            duration_secs: started.elapsed().as_secs_f64(),
            artifacts,
        },
    )
}

fn digest(path: &Path) -> Result<FileDigest> {
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: formats::sha256_file(path)?,
    })
}

/// Parse, validate, and normalize the three input files.
pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<()> {
    let started = Instant::now();
    let need = |p: &Option<PathBuf>, key: &str| -> Result<PathBuf> {
        p.clone().ok_or_else(|| {
            PipelineError::Validation(format!("{key} not set (config key or flag)"))
        })
    };
    let fire_path = need(&cfg.fire_path, "inputs.fire")?;
    let weather_path = need(&cfg.weather_path, "inputs.weather")?;
    let ndvi_path = need(&cfg.ndvi_path, "inputs.ndvi")?;

    let (events, fire_drops) = ingest::parse_fire_events(&fire_path)?;
    let (weather, weather_drops) =
        ingest::parse_weather(&weather_path, (cfg.study_start, cfg.study_end))?;
    let (ndvi, ndvi_drops) = ingest::parse_ndvi(&ndvi_path)?;

    formats::write_fire_norm(&cfg.out_dir.join("fire_norm.csv"), &events)?;
    formats::write_weather_norm(&cfg.out_dir.join("weather_norm.csv"), &weather)?;
    formats::write_ndvi_norm(&cfg.out_dir.join("ndvi_norm.csv"), &ndvi)?;

    println!(
        "ingest: fire {} kept / {} dropped; weather {} kept / {} dropped; ndvi {} kept / {} dropped",
        events.len(),
        fire_drops.dropped(),
        weather.len(),
        weather_drops.dropped(),
        ndvi.len(),
        ndvi_drops.dropped()
    );
    if events.is_empty() {
        eprintln!("warning: no fire events survived ingestion");
    }

    let mut detail = BTreeMap::new();
    detail.insert("fire".into(), serde_json::to_value(fire_drops).unwrap());
    detail.insert("weather".into(), serde_json::to_value(weather_drops).unwrap());
    detail.insert("ndvi".into(), serde_json::to_value(ndvi_drops).unwrap());
    record_stage(
        cfg,
        "ingest",
        vec![digest(&fire_path)?, digest(&weather_path)?, digest(&ndvi_path)?],
        fire_drops.rows + weather_drops.rows + ndvi_drops.rows,
        events.len() + weather.len() + ndvi.len(),
        detail,
        vec!["fire_norm.csv".into(), "weather_norm.csv".into(), "ndvi_norm.csv".into()],
        started,
    )
}

/// Spatio-temporal join of the normalized inputs.
pub fn cmd_fuse(cfg: &PipelineConfig) -> Result<()> {
    let started = Instant::now();
    let fire = require(cfg.out_dir.join("fire_norm.csv"), "ingest")?;
    let weather = require(cfg.out_dir.join("weather_norm.csv"), "ingest")?;
    let ndvi = require(cfg.out_dir.join("ndvi_norm.csv"), "ingest")?;

    let (events, _) = ingest::parse_fire_events(&fire)?;
    let (days, _) = ingest::parse_weather(&weather, (cfg.study_start, cfg.study_end))?;
    let (samples, _) = ingest::parse_ndvi(&ndvi)?;

    let (fused, exclusions) = fuse::fuse(&events, &days, &samples, &cfg.fuse)?;
    formats::write_fused(&cfg.out_dir.join("fused.csv"), &fused)?;
    formats::write_exclusions(&cfg.out_dir.join("exclusions.txt"), &exclusions, fused.len())?;

    println!(
        "fuse: {} events -> {} fused, excluded {} (no_station {}, missing_weather_var {}, no_ndvi {})",
        events.len(),
        fused.len(),
        exclusions.total(),
        exclusions.no_station,
        exclusions.missing_weather_var,
        exclusions.no_ndvi
    );

    let mut detail = BTreeMap::new();
    detail.insert("exclusions".into(), serde_json::to_value(&exclusions).unwrap());
    record_stage(
        cfg,
        "fuse",
        vec![digest(&fire)?, digest(&weather)?, digest(&ndvi)?],
        events.len(),
        fused.len(),
        detail,
        vec!["fused.csv".into(), "exclusions.txt".into()],
        started,
    )
}

/// Engineer features, cap FRP, label, split, and scale.
pub fn cmd_featurize(cfg: &PipelineConfig) -> Result<()> {
    let started = Instant::now();
    let fused_path = require(cfg.out_dir.join("fused.csv"), "fuse (or synth)")?;
    let records = formats::read_fused(&fused_path)?;

    let prepared = features::prepare(&records, &cfg.features, &cfg.label, &cfg.split_spec())?;

    let train_frp: Vec<f64> = prepared.train_idx.iter().map(|&i| prepared.frp_capped[i]).collect();
    let test_frp: Vec<f64> = prepared.test_idx.iter().map(|&i| prepared.frp_capped[i]).collect();
    formats::write_feature_matrix(
        &cfg.out_dir.join("train.csv"),
        &prepared.train,
        &prepared.manifest,
        &train_frp,
        &prepared.y_train,
        &prepared.class_names,
    )?;
    formats::write_feature_matrix(
        &cfg.out_dir.join("test.csv"),
        &prepared.test,
        &prepared.manifest,
        &test_frp,
        &prepared.y_test,
        &prepared.class_names,
    )?;

    let count = |ys: &[usize]| -> Vec<usize> {
        let mut counts = vec![0usize; prepared.class_names.len()];
        for &y in ys {
            counts[y] += 1;
        }
        counts
    };
    let model = FeaturizeModel {
        schema_version: 1,
        label_scheme: cfg.label.clone(),
        class_names: prepared.class_names.clone(),
        feature_config: cfg.features.clone(),
        manifest: prepared.manifest.clone(),
        frp_cap: prepared.frp_cap,
        scaler: prepared.scaler.clone(),
        train_class_counts: count(&prepared.y_train),
        test_class_counts: count(&prepared.y_test),
        scaler_fit_rows: prepared.train.n_rows(),
    };
    formats::save_json(&cfg.out_dir.join("features.json"), &model)?;

    println!(
        "featurize: {} fused -> train {:?} / test {:?} (classes {:?}), frp cap {:.3}",
        records.len(),
        model.train_class_counts,
        model.test_class_counts,
        model.class_names,
        model.frp_cap
    );
    if !model.scaler.constant_cols.is_empty() {
        let names: Vec<&str> = model
            .scaler
            .constant_cols
            .iter()
            .map(|&j| model.manifest.names[j].as_str())
            .collect();
        eprintln!("warning: constant feature columns pass through unscaled: {names:?}");
    }

    let mut detail = BTreeMap::new();
    detail.insert("frp_cap".into(), json!(model.frp_cap));
    detail.insert("train_class_counts".into(), json!(model.train_class_counts));
    detail.insert("test_class_counts".into(), json!(model.test_class_counts));
    detail.insert("scaler_fit_rows".into(), json!(model.scaler_fit_rows));
    record_stage(
        cfg,
        "featurize",
        vec![digest(&fused_path)?],
        records.len(),
        prepared.train.n_rows() + prepared.test.n_rows(),
        detail,
        vec!["train.csv".into(), "test.csv".into(), "features.json".into()],
        started,
    )
}

fn labels_to_indices(labels: &[String], class_names: &[String]) -> Result<Vec<usize>> {
    labels
        .iter()
        .map(|name| {
            class_names.iter().position(|c| c == name).ok_or_else(|| {
                PipelineError::Schema(format!(
                    "unknown label `{name}` (classes: {class_names:?})"
                ))
            })
        })
        .collect()
}

fn load_train_set(cfg: &PipelineConfig) -> Result<(FeatureFile, FeaturizeModel, Vec<usize>)> {
    let train_path = require(cfg.out_dir.join("train.csv"), "featurize")?;
    let features_path = require(cfg.out_dir.join("features.json"), "featurize")?;
    let file = formats::read_feature_matrix(&train_path)?;
    let model: FeaturizeModel = formats::load_json(&features_path)?;
    model.manifest.check_matches(&file.manifest)?;
    let labels = file
        .labels
        .as_ref()
        .ok_or_else(|| PipelineError::Schema("train.csv has no label column".into()))?;
    let y = labels_to_indices(labels, &model.class_names)?;
    Ok((file, model, y))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrainedModelInfo {
    pub family: String,
    pub artifact: String,
    pub threshold: Option<f64>,
    pub search_best_score: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrainSummary {
    pub models: Vec<TrainedModelInfo>,
}

fn search_space_for(cfg: &PipelineConfig, family: &str) -> Option<SearchSpace> {
    match family {
        "forest" => Some(SearchSpace::Forest(Default::default())),
        "gbdt_leafwise" => Some(SearchSpace::Gbdt(GbdtSpace::default())),
        "gbdt_depthwise" => Some(SearchSpace::Gbdt(GbdtSpace {
            growth: pyrocast_core::gbdt::Growth::DepthWise,
            ..Default::default()
        })),
        "logistic" => Some(SearchSpace::Logistic(Default::default())),
        "mlp" => Some(SearchSpace::Mlp(pyrocast_core::search::MlpSpace {
            hidden_layers: vec![cfg.mlp.hidden_layers.clone()],
            ..Default::default()
        })),
        _ => None,
    }
}

fn resample_for(cfg: &PipelineConfig, seed: u64) -> Option<ResampleConfig> {
    cfg.resample_enabled.then(|| ResampleConfig {
        seed,
        ..cfg.resample.clone()
    })
}

/// Train one family on the training matrix: optional randomized search,
/// optional fold-internal resampling, validation-based threshold selection,
/// final fit, artifact persistence.
fn train_family(
    cfg: &PipelineConfig,
    family: &str,
    x: &Matrix,
    y: &[usize],
    featurize: &FeaturizeModel,
) -> Result<TrainedModelInfo> {
    let n_classes = featurize.class_names.len();
    let seed = family_seed(cfg, family);
    let binary = n_classes == 2;

    // 1. configuration: searched or taken from the config file
    let mut search_best_score = None;
    let model_config: ModelConfig = if cfg.search_enabled {
        match search_space_for(cfg, family) {
            Some(space) => {
                let spec = SearchSpec {
                    seed: seeding::derive(seed, 1),
                    ..cfg.search.clone()
                };
                let resample = resample_for(cfg, seeding::derive(seed, 5));
                let (best, table) = random_search(x, y, n_classes, &spec, &space, resample.as_ref())?;
                formats::write_cv_table(&cfg.out_dir.join(format!("cv_table_{family}.csv")), &table)?;
                search_best_score = table
                    .iter()
                    .map(|r| r.mean_score)
                    .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.max(s))));
                println!(
                    "train[{family}]: search over {} candidates, best mean {} = {:.4}",
                    table.len(),
                    match cfg.search.scoring {
                        pyrocast_core::search::Scoring::MacroF1 => "macro-F1",
                        pyrocast_core::search::Scoring::HighRecall => "high recall",
                        pyrocast_core::search::Scoring::Accuracy => "accuracy",
                    },
                    search_best_score.unwrap_or(f64::NAN)
                );
                best
            }
            None => {
                if family != "stack" {
                    eprintln!("note: no search space for `{family}`, using configured values");
                }
                cfg.model_config(family)?
            }
        }
    } else {
        cfg.model_config(family)?
    };

    // 2. fit + threshold selection
    let mut threshold = None;
    let mut curve = None;
    let model: Model = if family == "stack" {
        let stack_cfg = match &model_config {
            ModelConfig::Stack(c) => pyrocast_core::stack::StackConfig {
                seed,
                ..c.clone()
            },
            _ => unreachable!("stack family resolves to a stack config"),
        };
        let resample = resample_for(cfg, seeding::derive(seed, 6));
        let fit = fit_stack(x, y, n_classes, &stack_cfg, resample.as_ref())?;
        if binary && cfg.threshold_enabled {
            // out-of-fold stack probabilities: validation-grade, never test
            let probs: Vec<f64> = (0..fit.oof_proba.n_rows())
                .map(|i| fit.oof_proba.get(i, 1))
                .collect();
            let result = optimize_threshold(&probs, y)?;
            threshold = Some(result.threshold);
            curve = Some(result.curve);
        }
        Model::Stack(fit.model)
    } else {
        if binary && cfg.threshold_enabled {
            // hold out a stratified quarter of train for threshold selection
            let spec = features::SplitSpec {
                test_fraction: 0.25,
                seed: seeding::derive(seed, 2),
            };
            let (fit_idx, val_idx) = features::split(y, &spec)?;
            let mut fit_x = x.select_rows(&fit_idx);
            let mut fit_y: Vec<usize> = fit_idx.iter().map(|&i| y[i]).collect();
            if let Some(rc) = resample_for(cfg, seeding::derive(seed, 7)) {
                let (rx, ry, _) = smote_tomek(&fit_x, &fit_y, &rc)?;
                fit_x = rx;
                fit_y = ry;
            }
            let probe = fit_model(
                &model_config.with_seed(seeding::derive(seed, 3)),
                &fit_x,
                &fit_y,
                n_classes,
            )?;
            let val_probs: Vec<f64> = val_idx
                .iter()
                .map(|&i| probe.predict_proba_row(x.row(i))[1])
                .collect();
            let val_y: Vec<usize> = val_idx.iter().map(|&i| y[i]).collect();
            let result = optimize_threshold(&val_probs, &val_y)?;
            threshold = Some(result.threshold);
            curve = Some(result.curve);
        }
        let mut full_x = x.clone();
        let mut full_y = y.to_vec();
        if let Some(rc) = resample_for(cfg, seeding::derive(seed, 8)) {
            let (rx, ry, report) = smote_tomek(&full_x, &full_y, &rc)?;
            println!(
                "train[{family}]: resampled {:?} -> {:?} (smote {:?}, {} tomek removals)",
                report.before, report.after, report.after_smote, report.links_removed
            );
            full_x = rx;
            full_y = ry;
        }
        fit_model(&model_config.with_seed(seeding::derive(seed, 4)), &full_x, &full_y, n_classes)?
    };

    let mut artifact = ModelArtifact::new(
        model,
        featurize.manifest.clone(),
        featurize.class_names.clone(),
    );
    artifact.threshold = threshold;
    for w in &artifact.warnings {
        eprintln!("warning: {family}: {w}");
    }
    let artifact_name = format!("model_{family}.json");
    formats::save_artifact(&cfg.out_dir.join(&artifact_name), &artifact)?;
    if let Some(curve) = curve {
        formats::write_threshold_curve(
            &cfg.out_dir.join(format!("threshold_curve_{family}.csv")),
            &curve,
        )?;
    }
    match threshold {
        Some(t) => println!("train[{family}]: done, optimized threshold = {t}"),
        None => println!("train[{family}]: done"),
    }
    Ok(TrainedModelInfo {
        family: family.to_string(),
        artifact: artifact_name,
        threshold,
        search_best_score,
        warnings: artifact.warnings.clone(),
    })
}

/// Train every configured family and persist the artifacts.
pub fn cmd_train(cfg: &PipelineConfig) -> Result<()> {
    let started = Instant::now();
    let (file, featurize, y) = load_train_set(cfg)?;
    let mut models = Vec::new();
    for family in &cfg.train_models {
        models.push(train_family(cfg, family, &file.x, &y, &featurize)?);
    }
    let summary = TrainSummary { models };
    formats::save_json(&cfg.out_dir.join("train_summary.json"), &summary)?;

    let artifacts: Vec<String> = summary.models.iter().map(|m| m.artifact.clone()).collect();
    let mut detail = BTreeMap::new();
    detail.insert("models".into(), serde_json::to_value(&summary.models).unwrap());
    record_stage(
        cfg,
        "train",
        vec![digest(&cfg.out_dir.join("train.csv"))?],
        file.x.n_rows(),
        file.x.n_rows(),
        detail,
        artifacts,
        started,
    )
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvaluatedModel {
    pub family: String,
    pub threshold: Option<f64>,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub high_recall: f64,
    pub roc_auc: Option<f64>,
    pub report_json: String,
    pub report_txt: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EvaluateSummary {
    pub class_names: Vec<String>,
    pub models: Vec<EvaluatedModel>,
}

/// Evaluate every trained artifact on the held-out test matrix and emit the
/// full report set (tables, confusion matrices, ROC, VIF, correlations).
pub fn cmd_evaluate(cfg: &PipelineConfig) -> Result<()> {
    let started = Instant::now();
    let test_path = require(cfg.out_dir.join("test.csv"), "featurize")?;
    let train_summary_path = require(cfg.out_dir.join("train_summary.json"), "train")?;
    let featurize: FeaturizeModel =
        formats::load_json(&require(cfg.out_dir.join("features.json"), "featurize")?)?;
    let train_info: TrainSummary = formats::load_json(&train_summary_path)?;

    let test = formats::read_feature_matrix(&test_path)?;
    featurize.manifest.check_matches(&test.manifest)?;
    let y = labels_to_indices(
        test.labels
            .as_ref()
            .ok_or_else(|| PipelineError::Schema("test.csv has no label column".into()))?,
        &featurize.class_names,
    )?;
    let n_classes = featurize.class_names.len();

    let mut evaluated = Vec::new();
    for info in &train_info.models {
        let artifact = formats::load_artifact(&cfg.out_dir.join(&info.artifact))?;
        let probs = artifact.predict_proba(&test.x, &test.manifest)?;
        let preds = artifact.predict(&test.x, &test.manifest)?;
        let report = metrics::report(&y, &preds, n_classes)?;

        let auc = if n_classes == 2 {
            let high: Vec<f64> = (0..probs.n_rows()).map(|i| probs.get(i, 1)).collect();
            let auc = metrics::roc_auc(&high, &y)?;
            let curve = metrics::roc_curve(&high, &y)?;
            formats::write_roc_curve(
                &cfg.out_dir.join(format!("roc_{}.csv", info.family)),
                &curve,
            )?;
            Some(auc)
        } else {
            None
        };

        let report_json = format!("report_{}.json", info.family);
        let report_txt = format!("report_{}.txt", info.family);
        formats::save_json(&cfg.out_dir.join(&report_json), &report)?;
        let table = render_report_table(
            &info.family,
            &report,
            &featurize.class_names,
            artifact.threshold,
            auc,
        );
        std::fs::write(cfg.out_dir.join(&report_txt), &table)
            .map_err(PipelineError::io(cfg.out_dir.join(&report_txt)))?;
        print!("{table}");
        formats::write_confusion(
            &cfg.out_dir.join(format!("confusion_{}_raw.csv", info.family)),
            &report.confusion,
            &featurize.class_names,
        )?;
        formats::write_confusion_pct(
            &cfg.out_dir.join(format!("confusion_{}_norm.csv", info.family)),
            &report.confusion_pct,
            &featurize.class_names,
        )?;

        evaluated.push(EvaluatedModel {
            family: info.family.clone(),
            threshold: artifact.threshold,
            accuracy: report.accuracy,
            macro_f1: report.macro_f1,
            weighted_f1: report.weighted_f1,
            high_recall: report.per_class.last().map_or(0.0, |m| m.recall),
            roc_auc: auc,
            report_json,
            report_txt,
        });
    }

    // multicollinearity and correlation diagnostics on the training features
    let train = formats::read_feature_matrix(&cfg.out_dir.join("train.csv"))?;
    let vif = metrics::vif(&train.x)?;
    formats::write_vif(&cfg.out_dir.join("vif.csv"), &featurize.manifest.names, &vif)?;
    let (corr, _) = metrics::correlation_matrix(&train.x)?;
    formats::write_correlation(&cfg.out_dir.join("corr.csv"), &featurize.manifest.names, &corr)?;
    std::fs::write(
        cfg.out_dir.join("corr_heatmap.svg"),
        correlation_svg(&featurize.manifest.names, &corr),
    )
    .map_err(PipelineError::io(cfg.out_dir.join("corr_heatmap.svg")))?;

    let summary = EvaluateSummary {
        class_names: featurize.class_names.clone(),
        models: evaluated,
    };
    formats::save_json(&cfg.out_dir.join("evaluate_summary.json"), &summary)?;

    let mut detail = BTreeMap::new();
    detail.insert(
        "models".into(),
        serde_json::to_value(summary.models.iter().map(|m| &m.family).collect::<Vec<_>>()).unwrap(),
    );
    record_stage(
        cfg,
        "evaluate",
        vec![digest(&test_path)?],
        test.x.n_rows(),
        test.x.n_rows(),
        detail,
        vec!["evaluate_summary.json".into()],
        started,
    )
}

/// Apply a persisted artifact (with its stored threshold) to a feature file.
pub fn cmd_predict(
    cfg: &PipelineConfig,
    model_path: &Path,
    input_path: &Path,
    output_path: Option<&Path>,
) -> Result<()> {
    let started = Instant::now();
    let artifact = formats::load_artifact(model_path)?;
    let input = formats::read_feature_matrix(input_path)?;
    let probs = artifact.predict_proba(&input.x, &input.manifest)?;
    let preds = artifact.predict(&input.x, &input.manifest)?;

    let default_out = cfg.out_dir.join("predictions.csv");
    let out_path = output_path.unwrap_or(&default_out);
    let mut text = String::new();
    let prob_cols: Vec<String> = artifact.classes.iter().map(|c| format!("p_{c}")).collect();
    text.push_str(&format!("row,{},predicted\n", prob_cols.join(",")));
    for i in 0..input.x.n_rows() {
        let cells: Vec<String> = probs.row(i).iter().map(|p| p.to_string()).collect();
        text.push_str(&format!(
            "{i},{},{}\n",
            cells.join(","),
            artifact.classes[preds[i]]
        ));
    }
    if let Some(parent) = out_path.parent() {
        std::fs::create_dir_all(parent).map_err(PipelineError::io(out_path))?;
    }
    std::fs::write(out_path, text).map_err(PipelineError::io(out_path))?;
    println!(
        "predict: {} rows -> {} ({} model{})",
        input.x.n_rows(),
        out_path.display(),
        artifact.family,
        artifact
            .threshold
            .map(|t| format!(", threshold {t}"))
            .unwrap_or_default()
    );
    record_stage(
        cfg,
        "predict",
        vec![digest(model_path)?, digest(input_path)?],
        input.x.n_rows(),
        input.x.n_rows(),
        BTreeMap::new(),
        vec![out_path.display().to_string()],
        started,
    )
}

/// Generate the synthetic fused benchmark dataset (and optionally a raw
/// input trio for exercising ingest and fuse).
pub fn cmd_synth(cfg: &PipelineConfig, raw_dir: Option<&Path>) -> Result<()> {
    let started = Instant::now();
    let spec = SynthSpec {
        n: cfg.synth_n,
        ratio: cfg.synth_ratio,
        signal: cfg.synth_signal,
        seed: seeding::derive(cfg.seed, 0x51),
    };
    let records = synth::generate(&spec);
    let fused_path = cfg.out_dir.join("fused.csv");
    formats::write_fused(&fused_path, &records)?;
    let high = records.iter().filter(|r| r.event.frp > 40.0).count();
    println!(
        "synth: {} fused rows ({} high / {} low by the 40 MW boundary), signal {}",
        records.len(),
        high,
        records.len() - high,
        cfg.synth_signal
    );
    if let Some(dir) = raw_dir {
        let (events, weather, ndvi) = synth::generate_raw_trio(cfg.synth_n.min(500), cfg.seed);
        formats::write_fire_norm(&dir.join("fire.csv"), &events)?;
        formats::write_weather_norm(&dir.join("weather.csv"), &weather)?;
        formats::write_ndvi_norm(&dir.join("ndvi.csv"), &ndvi)?;
        println!(
            "synth: raw trio in {} ({} events, {} station-days, {} ndvi samples)",
            dir.display(),
            events.len(),
            weather.len(),
            ndvi.len()
        );
    }
    let mut detail = BTreeMap::new();
    detail.insert("n".into(), json!(spec.n));
    detail.insert("ratio".into(), json!(spec.ratio));
    detail.insert("signal".into(), json!(spec.signal));
    detail.insert("high_rows".into(), json!(high));
    formats::save_json(
        &cfg.out_dir.join("synth_summary.json"),
        &json!({"n": spec.n, "ratio": spec.ratio, "signal": spec.signal, "high_rows": high}),
    )?;
    record_stage(
        cfg,
        "synth",
        Vec::new(),
        0,
        records.len(),
        detail,
        vec!["fused.csv".into()],
        started,
    )
}

/// Re-render tables and plots from persisted evaluation output, without
/// recomputation.
pub fn cmd_report(cfg: &PipelineConfig) -> Result<()> {
    let summary_path = require(cfg.out_dir.join("evaluate_summary.json"), "evaluate")?;
    let summary: EvaluateSummary = formats::load_json(&summary_path)?;
    for model in &summary.models {
        let report: metrics::ClassificationReport =
            formats::load_json(&cfg.out_dir.join(&model.report_json))?;
        let table = render_report_table(
            &model.family,
            &report,
            &summary.class_names,
            model.threshold,
            model.roc_auc,
        );
        std::fs::write(cfg.out_dir.join(&model.report_txt), &table)
            .map_err(PipelineError::io(cfg.out_dir.join(&model.report_txt)))?;
        print!("{table}");
    }
    // re-render the heat grid from the persisted correlation matrix
    let corr_path = cfg.out_dir.join("corr.csv");
    if corr_path.exists() {
        let text = std::fs::read_to_string(&corr_path).map_err(PipelineError::io(&corr_path))?;
        let mut lines = text.lines();
        let names: Vec<String> = lines
            .next()
            .unwrap_or("")
            .split(',')
            .skip(1)
            .map(|s| s.to_string())
            .collect();
        let mut rows = Vec::new();
        for line in lines {
            let row: Vec<f64> = line
                .split(',')
                .skip(1)
                .map(|c| c.parse().unwrap_or(0.0))
                .collect();
            rows.push(row);
        }
        let corr = Matrix::from_rows(&rows);
        std::fs::write(
            cfg.out_dir.join("corr_heatmap.svg"),
            correlation_svg(&names, &corr),
        )
        .map_err(PipelineError::io(cfg.out_dir.join("corr_heatmap.svg")))?;
    }
    Ok(())
}
