//! Readers and writers for every file the pipeline exchanges between stages.
//! All delimited text is UTF-8, comma-separated, `.` decimal; floats are
//! written in Rust's shortest round-trip form so normalized files re-parse to
//! identical records.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use pyrocast_core::dataset::{FeatureManifest, Matrix};
use pyrocast_core::date::Date;
use pyrocast_core::features::{FeatureConfig, LabelScheme, Scaler};
use pyrocast_core::fuse::{ExclusionSummary, FusedRecord};
use pyrocast_core::metrics::RocPoint;
use pyrocast_core::model::ModelArtifact;
use pyrocast_core::search::CvRow;
use pyrocast_core::types::{FireEvent, NdviSample, Region, WeatherDay};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{PipelineError, Result};

fn date_string(d: Date) -> String {
    let (y, m, day) = d.to_ymd();
    format!("{y:04}-{m:02}-{day:02}")
}

fn minutes_string(minutes: u32) -> String {
    format!("{:02}{:02}", minutes / 60, minutes % 60)
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(PipelineError::io(path))?;
    }
    Ok(std::io::BufWriter::new(
        std::fs::File::create(path).map_err(PipelineError::io(path))?,
    ))
}

fn opt_str<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_fire_norm(path: &Path, events: &[FireEvent]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "latitude,longitude,acq_date,acq_time,frp,confidence")
        .map_err(PipelineError::io(path))?;
    for e in events {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            e.latitude,
            e.longitude,
            date_string(e.date),
            minutes_string(e.minutes),
            e.frp,
            opt_str(e.confidence)
        )
        .map_err(PipelineError::io(path))?;
    }
    Ok(())
}

pub fn write_weather_norm(path: &Path, days: &[WeatherDay]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(
        w,
        "station_id,region,latitude,longitude,date,tmin,tmax,tavg,prcp,wspd"
    )
    .map_err(PipelineError::io(path))?;
    for d in days {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            d.station_id,
            d.region.code(),
            d.latitude,
            d.longitude,
            date_string(d.date),
            opt_str(d.tmin),
            opt_str(d.tmax),
            opt_str(d.tavg),
            opt_str(d.prcp),
            opt_str(d.wspd)
        )
        .map_err(PipelineError::io(path))?;
    }
    Ok(())
}

pub fn write_ndvi_norm(path: &Path, samples: &[NdviSample]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "latitude,longitude,composite_date,ndvi").map_err(PipelineError::io(path))?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{}",
            s.latitude,
            s.longitude,
            date_string(s.composite_date),
            s.ndvi
        )
        .map_err(PipelineError::io(path))?;
    }
    Ok(())
}

pub const FUSED_HEADER: &str = "latitude,longitude,acq_date,acq_time,frp,confidence,region,\
                                tmin,tmax,tavg,prcp,wspd,distance_m,ndvi,ndvi_lag_days";

pub fn write_fused(path: &Path, records: &[FusedRecord]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{FUSED_HEADER}").map_err(PipelineError::io(path))?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.event.latitude,
            r.event.longitude,
            date_string(r.event.date),
            minutes_string(r.event.minutes),
            r.event.frp,
            opt_str(r.event.confidence),
            r.region.code(),
            r.tmin,
            r.tmax,
            r.tavg,
            r.prcp,
            r.wspd,
            r.distance_m,
            r.ndvi,
            r.ndvi_lag_days
        )
        .map_err(PipelineError::io(path))?;
    }
    Ok(())
}

pub fn read_fused(path: &Path) -> Result<Vec<FusedRecord>> {
    let file = std::fs::File::open(path).map_err(PipelineError::io(path))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let expected: Vec<&str> = FUSED_HEADER.split(',').collect();
    let header = reader
        .headers()
        .map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))?;
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(PipelineError::Schema(format!(
            "{}: not a fused-records file (unexpected header)",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))?;
        let bad = |what: &str| {
            PipelineError::Schema(format!("{} row {}: bad {what}", path.display(), i + 2))
        };
        let cell = |j: usize| row.get(j).unwrap_or("").trim();
        let f = |j: usize, what: &str| cell(j).parse::<f64>().map_err(|_| bad(what));
        let date = chrono::NaiveDate::parse_from_str(cell(2), "%Y-%m-%d")
            .map_err(|_| bad("acq_date"))?;
        use chrono::Datelike;
        let time: u32 = cell(3).parse().map_err(|_| bad("acq_time"))?;
        let confidence = if cell(5).is_empty() {
            None
        } else {
            Some(cell(5).parse::<u8>().map_err(|_| bad("confidence"))?)
        };
        out.push(FusedRecord {
            event: FireEvent {
                latitude: f(0, "latitude")?,
                longitude: f(1, "longitude")?,
                date: Date::from_ymd(date.year(), date.month(), date.day()),
                minutes: (time / 100) * 60 + time % 100,
                frp: f(4, "frp")?,
                confidence,
            },
            region: Region::from_code(cell(6)).ok_or_else(|| bad("region"))?,
            tmin: f(7, "tmin")?,
            tmax: f(8, "tmax")?,
            tavg: f(9, "tavg")?,
            prcp: f(10, "prcp")?,
            wspd: f(11, "wspd")?,
            distance_m: f(12, "distance_m")?,
            ndvi: f(13, "ndvi")?,
            ndvi_lag_days: cell(14).parse().map_err(|_| bad("ndvi_lag_days"))?,
        });
    }
    Ok(out)
}

/// Feature matrix file: the header line is the feature manifest followed by
/// the target columns, one engineered row per line, labels as class names.
pub fn write_feature_matrix(
    path: &Path,
    x: &Matrix,
    manifest: &FeatureManifest,
    frp: &[f64],
    labels: &[usize],
    class_names: &[String],
) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{},frp_capped,label", manifest.names.join(","))
        .map_err(PipelineError::io(path))?;
    for i in 0..x.n_rows() {
        let cells: Vec<String> = x.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(
            w,
            "{},{},{}",
            cells.join(","),
            frp[i],
            class_names[labels[i]]
        )
        .map_err(PipelineError::io(path))?;
    }
    Ok(())
}

/// A parsed feature matrix; target columns are optional so the same reader
/// serves training exports and bare prediction inputs.
pub struct FeatureFile {
    pub manifest: FeatureManifest,
    pub x: Matrix,
    pub labels: Option<Vec<String>>,
    pub frp: Option<Vec<f64>>,
}

pub fn read_feature_matrix(path: &Path) -> Result<FeatureFile> {
    let file = std::fs::File::open(path).map_err(PipelineError::io(path))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let label_col = header.iter().position(|c| c == "label");
    let frp_col = header.iter().position(|c| c == "frp_capped");
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|j| Some(*j) != label_col && Some(*j) != frp_col)
        .collect();
    let manifest = FeatureManifest::new(
        feature_cols.iter().map(|&j| header[j].clone()).collect(),
    );
    let mut data = Vec::new();
    let mut labels = label_col.map(|_| Vec::new());
    let mut frp = frp_col.map(|_| Vec::new());
    let mut n_rows = 0;
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))?;
        for &j in &feature_cols {
            let cell = row.get(j).unwrap_or("").trim();
            data.push(cell.parse::<f64>().map_err(|_| {
                PipelineError::Schema(format!(
                    "{} row {}: bad value `{cell}` in column `{}`",
                    path.display(),
                    i + 2,
                    header[j]
                ))
            })?);
        }
        if let (Some(labels), Some(col)) = (labels.as_mut(), label_col) {
            labels.push(row.get(col).unwrap_or("").trim().to_string());
        }
        if let (Some(frp), Some(col)) = (frp.as_mut(), frp_col) {
            let cell = row.get(col).unwrap_or("").trim();
            frp.push(cell.parse::<f64>().map_err(|_| {
                PipelineError::Schema(format!("{} row {}: bad frp_capped", path.display(), i + 2))
            })?);
        }
        n_rows += 1;
    }
    Ok(FeatureFile {
        x: Matrix::from_flat(n_rows, feature_cols.len(), data),
        manifest,
        labels,
        frp,
    })
}

/// Per-run feature pipeline state persisted by the featurize stage and needed
/// again at train/predict time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeaturizeModel {
    pub schema_version: u32,
    pub label_scheme: LabelScheme,
    pub class_names: Vec<String>,
    pub feature_config: FeatureConfig,
    pub manifest: FeatureManifest,
    pub frp_cap: f64,
    pub scaler: Scaler,
    /// Row counts per class in train/test, and the scaler-fit row count;
    /// the audit trail that the scaler saw only training rows.
    pub train_class_counts: Vec<usize>,
    pub test_class_counts: Vec<usize>,
    pub scaler_fit_rows: usize,
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| PipelineError::Validation(format!("serialize {}: {e}", path.display())))?;
    w.write_all(text.as_bytes()).map_err(PipelineError::io(path))?;
    w.write_all(b"\n").map_err(PipelineError::io(path))?;
    Ok(())
}

pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(PipelineError::io(path))?;
    serde_json::from_str(&text)
        .map_err(|e| PipelineError::Schema(format!("{}: {e}", path.display())))
}

pub fn save_artifact(path: &Path, artifact: &ModelArtifact) -> Result<()> {
    save_json(path, artifact)
}

pub fn load_artifact(path: &Path) -> Result<ModelArtifact> {
    let artifact: ModelArtifact = load_json(path)?;
    if artifact.schema_version != pyrocast_core::model::ARTIFACT_SCHEMA_VERSION {
        return Err(PipelineError::Schema(format!(
            "{}: artifact schema v{} unsupported (expected v{})",
            path.display(),
            artifact.schema_version,
            pyrocast_core::model::ARTIFACT_SCHEMA_VERSION
        )));
    }
    Ok(artifact)
}

pub fn write_exclusions(path: &Path, summary: &ExclusionSummary, fused: usize) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "cause               count").map_err(PipelineError::io(path))?;
    for (name, count) in [
        ("no_station", summary.no_station),
        ("missing_weather_var", summary.missing_weather_var),
        ("no_ndvi", summary.no_ndvi),
    ] {
        writeln!(w, "{name:<19} {count:>6}").map_err(PipelineError::io(path))?;
    }
    writeln!(w, "{:<19} {:>6}", "total_excluded", summary.total())
        .map_err(PipelineError::io(path))?;
    writeln!(w, "{:<19} {fused:>6}", "fused").map_err(PipelineError::io(path))?;
    Ok(())
}

pub fn write_cv_table(path: &Path, rows: &[CvRow]) -> Result<()> {
    let mut w = create(path)?;
    let n_folds = rows.first().map_or(0, |r| r.fold_scores.len());
    let fold_cols: Vec<String> = (0..n_folds).map(|f| format!("fold{f}")).collect();
    writeln!(w, "iteration,family,mean_score,{},params", fold_cols.join(","))
        .map_err(PipelineError::io(path))?;
    for r in rows {
        let folds: Vec<String> = r.fold_scores.iter().map(|s| s.to_string()).collect();
        let params = serde_json::to_string(&r.config)
            .map_err(|e| PipelineError::Validation(e.to_string()))?;
        writeln!(
            w,
            "{},{},{},{},\"{}\"",
            r.iteration,
            r.config.family(),
            r.mean_score,
            folds.join(","),
            params.replace('"', "\"\"")
        )
        .map_err(PipelineError::io(path))?;
    }
    Ok(())
}

pub fn write_threshold_curve(path: &Path, curve: &[(f64, f64)]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "threshold,f1_high").map_err(PipelineError::io(path))?;
    for (t, f1) in curve {
        writeln!(w, "{t},{f1}").map_err(PipelineError::io(path))?;
    }
    Ok(())
}

pub fn write_roc_curve(path: &Path, points: &[RocPoint]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "threshold,fpr,tpr").map_err(PipelineError::io(path))?;
    for p in points {
        writeln!(w, "{},{},{}", p.threshold, p.fpr, p.tpr).map_err(PipelineError::io(path))?;
    }
    Ok(())
}

pub fn write_confusion(path: &Path, matrix: &[Vec<usize>], class_names: &[String]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "true\\pred,{}", class_names.join(",")).map_err(PipelineError::io(path))?;
    for (name, row) in class_names.iter().zip(matrix) {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        writeln!(w, "{name},{}", cells.join(",")).map_err(PipelineError::io(path))?;
    }
    Ok(())
}

pub fn write_confusion_pct(path: &Path, matrix: &[Vec<f64>], class_names: &[String]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "true\\pred,{}", class_names.join(",")).map_err(PipelineError::io(path))?;
    for (name, row) in class_names.iter().zip(matrix) {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        writeln!(w, "{name},{}", cells.join(",")).map_err(PipelineError::io(path))?;
    }
    Ok(())
}

pub fn write_vif(path: &Path, names: &[String], values: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "feature,vif").map_err(PipelineError::io(path))?;
    for (name, v) in names.iter().zip(values) {
        let cell = if v.is_infinite() { "inf".to_string() } else { v.to_string() };
        writeln!(w, "{name},{cell}").map_err(PipelineError::io(path))?;
    }
    Ok(())
}

pub fn write_correlation(path: &Path, names: &[String], matrix: &Matrix) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "feature,{}", names.join(",")).map_err(PipelineError::io(path))?;
    for (i, name) in names.iter().enumerate() {
        let cells: Vec<String> = matrix.row(i).iter().map(|v| v.to_string()).collect();
        writeln!(w, "{name},{}", cells.join(",")).map_err(PipelineError::io(path))?;
    }
    Ok(())
}

/// One pipeline run's provenance: config hash, input digests, per-stage row
/// accounting and timings.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub stages: Vec<StageRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub config_hash: String,
    pub inputs: Vec<FileDigest>,
    pub rows_in: usize,
    pub rows_out: usize,
    pub detail: BTreeMap<String, serde_json::Value>,
    pub duration_secs: f64,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(PipelineError::io(path))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

pub fn sha256_text(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

impl RunManifest {
    pub fn append(out_dir: &Path, record: StageRecord) -> Result<()> {
        let path = out_dir.join("manifest.json");
        let mut manifest: RunManifest = if path.exists() {
            load_json(&path)?
        } else {
            RunManifest::default()
        };
        manifest.stages.push(record);
        save_json(&path, &manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest;

    #[test]
    fn normalized_fire_file_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fire.csv");
        let events = vec![
            FireEvent {
                latitude: -33.123456789,
                longitude: 151.00000001,
                date: Date::from_ymd(2020, 2, 29),
                minutes: 23 * 60 + 59,
                frp: 1.0 / 3.0,
                confidence: Some(77),
            },
            FireEvent {
                latitude: -20.0,
                longitude: 140.5,
                date: Date::from_ymd(2015, 1, 1),
                minutes: 0,
                frp: 0.0,
                confidence: None,
            },
        ];
        write_fire_norm(&path, &events).unwrap();
        let (parsed, summary) = ingest::parse_fire_events(&path).unwrap();
        assert_eq!(parsed, events);
        assert_eq!(summary.dropped(), 0);
    }

    #[test]
    fn normalized_weather_file_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weather.csv");
        let days = vec![WeatherDay {
            station_id: "086338".into(),
            region: Region::VIC,
            latitude: -37.8255,
            longitude: 144.98,
            date: Date::from_ymd(2019, 12, 31),
            tmin: Some(17.3),
            tmax: None,
            tavg: Some(22.855),
            prcp: Some(0.0),
            wspd: Some(31.7),
        }];
        write_weather_norm(&path, &days).unwrap();
        let window = (Date::from_ymd(2015, 1, 1), Date::from_ymd(2023, 12, 31));
        let (parsed, _) = ingest::parse_weather(&path, window).unwrap();
        assert_eq!(parsed, days);
    }

    #[test]
    fn fused_file_roundtrips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fused.csv");
        let records = vec![FusedRecord {
            event: FireEvent {
                latitude: -33.9,
                longitude: 150.1,
                date: Date::from_ymd(2021, 11, 5),
                minutes: 125,
                frp: 55.25,
                confidence: None,
            },
            region: Region::NSW,
            tmin: 12.5,
            tmax: 31.0,
            tavg: 21.75,
            prcp: 0.2,
            wspd: 19.0,
            distance_m: 3120.5,
            ndvi: 0.41,
            ndvi_lag_days: -3,
        }];
        write_fused(&path, &records).unwrap();
        assert_eq!(read_fused(&path).unwrap(), records);
    }

    #[test]
    fn feature_matrix_roundtrips_values_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.csv");
        let x = Matrix::from_rows(&[vec![0.5, -1.25], vec![1e-9, 3.0]]);
        let manifest = FeatureManifest::new(vec!["a".into(), "b".into()]);
        write_feature_matrix(
            &path,
            &x,
            &manifest,
            &[10.0, 99.5],
            &[0, 1],
            &["low".into(), "high".into()],
        )
        .unwrap();
        let file = read_feature_matrix(&path).unwrap();
        assert_eq!(file.manifest, manifest);
        assert_eq!(file.x, x);
        assert_eq!(file.labels.unwrap(), vec!["low", "high"]);
        assert_eq!(file.frp.unwrap(), vec![10.0, 99.5]);
    }

    #[test]
    fn artifact_roundtrip_is_byte_identical() {
        use pyrocast_core::model::{fit_model, ModelArtifact, ModelConfig};
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        let y = vec![0, 0, 1, 1];
        let model = fit_model(
            &ModelConfig::Forest(pyrocast_core::forest::ForestConfig {
                n_trees: 3,
                ..Default::default()
            }),
            &x,
            &y,
            2,
        )
        .unwrap();
        let manifest = FeatureManifest::new(vec!["f0".into()]);
        let mut artifact = ModelArtifact::new(model, manifest, vec!["low".into(), "high".into()]);
        artifact.threshold = Some(0.47);

        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("m1.json");
        let p2 = dir.path().join("m2.json");
        save_artifact(&p1, &artifact).unwrap();
        let loaded = load_artifact(&p1).unwrap();
        save_artifact(&p2, &loaded).unwrap();
        assert_eq!(
            std::fs::read(&p1).unwrap(),
            std::fs::read(&p2).unwrap(),
            "save -> load -> save must be byte-identical"
        );
    }
}
