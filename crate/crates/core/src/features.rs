//! Model-ready features from fused records: engineered columns, FRP capping,
//! risk labels, train-only standardization, and stratified splitting.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureManifest, Matrix};
use crate::fuse::FusedRecord;
use crate::math;
use crate::seeding;
use crate::types::{Region, RiskClass};
use crate::{Error, Result};

/// Regions carrying a dummy column; the complement (NSW, NT, ACT) is the
/// reference category and encodes as all zeros.
pub const DUMMY_REGIONS: [Region; 5] = [
    Region::WA,
    Region::QLD,
    Region::VIC,
    Region::TAS,
    Region::SA,
];

/// Feature-set options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Append raw tmin/tmax/tavg/prcp to the engineered set.
    pub include_raw_weather: bool,
    /// FRP capping quantile.
    pub cap_quantile: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            include_raw_weather: false,
            cap_quantile: 0.99,
        }
    }
}

/// Column names in matrix order.
pub fn feature_names(config: &FeatureConfig) -> Vec<String> {
    let mut names: Vec<String> = [
        "diurnal_range",
        "wspd",
        "month_sin",
        "month_cos",
        "ndvi_scaled",
        "wspd_prcp",
        "ndvi_prcp",
        "range_prcp",
        "region_WA",
        "region_QLD",
        "region_VIC",
        "region_TAS",
        "region_SA",
        "distance_m",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if config.include_raw_weather {
        for s in ["tmin", "tmax", "tavg", "prcp"] {
            names.push(s.to_string());
        }
    }
    names
}

/// Which columns the scaler standardizes. Cyclic encodings and dummies stay
/// untouched so their unit-circle / one-hot invariants survive scaling.
pub fn scaled_mask(config: &FeatureConfig) -> Vec<bool> {
    let mut mask = alloc::vec![
        true,  // diurnal_range
        true,  // wspd
        false, // month_sin
        false, // month_cos
        true,  // ndvi_scaled
        true,  // wspd_prcp
        true,  // ndvi_prcp
        true,  // range_prcp
        false, false, false, false, false, // region dummies
        true,  // distance_m
    ];
    if config.include_raw_weather {
        mask.extend([true, true, true, true]);
    }
    mask
}

/// Cyclic month encoding `(sin(2πm/12), cos(2πm/12))`, months 1..=12.
/// Quarter-cycle months sit on the unit-circle axes and are returned exactly.
pub fn encode_month(month: u32) -> Result<(f64, f64)> {
    if !(1..=12).contains(&month) {
        return Err(Error::InvalidParam(alloc::format!(
            "month must be in 1..=12, got {month}"
        )));
    }
    Ok(match month % 12 {
        0 => (0.0, 1.0),
        3 => (1.0, 0.0),
        6 => (0.0, -1.0),
        9 => (-1.0, 0.0),
        m => {
            let theta = 2.0 * core::f64::consts::PI * m as f64 / 12.0;
            (math::sin(theta), math::cos(theta))
        }
    })
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("quantile of empty list"));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParam(alloc::format!("quantile q={q} outside [0,1]")));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = q * (sorted.len() - 1) as f64;
    let lo = math::floor(k) as usize;
    let frac = k - lo as f64;
    if lo + 1 < sorted.len() {
        Ok(sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]))
    } else {
        Ok(sorted[lo])
    }
}

/// Cap values at their `q`-quantile: returns the cap and `min(x, cap)` per
/// value. Re-applying the returned cap is a no-op.
pub fn cap_percentile(values: &[f64], q: f64) -> Result<(f64, Vec<f64>)> {
    let cap = quantile(values, q)?;
    Ok((cap, values.iter().map(|&v| v.min(cap)).collect()))
}

/// FRP cut points mapping capped FRP to a risk class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LabelScheme {
    /// `frp <= threshold` is low, above is high.
    TwoClass { threshold: f64 },
    /// `<= t1` low, `<= t2` medium, above high; requires `t1 < t2`.
    ThreeClass { t1: f64, t2: f64 },
}

impl Default for LabelScheme {
    fn default() -> Self {
        LabelScheme::TwoClass { threshold: 40.0 }
    }
}

impl LabelScheme {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LabelScheme::TwoClass { threshold } if threshold.is_finite() => Ok(()),
            LabelScheme::ThreeClass { t1, t2 } if t1.is_finite() && t1 < t2 => Ok(()),
            _ => Err(Error::InvalidParam(
                "label thresholds must be finite and strictly increasing".to_string(),
            )),
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            LabelScheme::TwoClass { .. } => 2,
            LabelScheme::ThreeClass { .. } => 3,
        }
    }

    pub fn class_names(&self) -> Vec<&'static str> {
        match self {
            LabelScheme::TwoClass { .. } => alloc::vec!["low", "high"],
            LabelScheme::ThreeClass { .. } => alloc::vec!["low", "medium", "high"],
        }
    }

    pub fn label(&self, frp_capped: f64) -> RiskClass {
        match *self {
            LabelScheme::TwoClass { threshold } => {
                if frp_capped <= threshold {
                    RiskClass::Low
                } else {
                    RiskClass::High
                }
            }
            LabelScheme::ThreeClass { t1, t2 } => {
                if frp_capped <= t1 {
                    RiskClass::Low
                } else if frp_capped <= t2 {
                    RiskClass::Medium
                } else {
                    RiskClass::High
                }
            }
        }
    }

    pub fn class_index(&self, frp_capped: f64) -> usize {
        self.label(frp_capped).index(self.n_classes())
    }
}

/// One engineered row; interactions are products of unscaled physical values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub diurnal_range: f64,
    pub wspd: f64,
    pub month_sin: f64,
    pub month_cos: f64,
    /// Raw NDVI; the matrix column is standardized by the train-fit scaler.
    pub ndvi: f64,
    pub wspd_prcp: f64,
    pub ndvi_prcp: f64,
    pub range_prcp: f64,
    pub region: Region,
    pub distance_m: f64,
    pub tmin: f64,
    pub tmax: f64,
    pub tavg: f64,
    pub prcp: f64,
    pub frp_capped: f64,
    pub label: RiskClass,
}

impl FeatureRow {
    pub fn to_row(&self, config: &FeatureConfig) -> Vec<f64> {
        let mut row = alloc::vec![
            self.diurnal_range,
            self.wspd,
            self.month_sin,
            self.month_cos,
            self.ndvi,
            self.wspd_prcp,
            self.ndvi_prcp,
            self.range_prcp,
        ];
        for r in DUMMY_REGIONS {
            row.push(if self.region == r { 1.0 } else { 0.0 });
        }
        row.push(self.distance_m);
        if config.include_raw_weather {
            row.extend([self.tmin, self.tmax, self.tavg, self.prcp]);
        }
        row
    }
}

/// Engineer one fused record. `frp_capped` comes from a dataset-level
/// [`cap_percentile`] pass.
pub fn engineer(rec: &FusedRecord, frp_capped: f64, scheme: &LabelScheme) -> FeatureRow {
    let (month_sin, month_cos) =
        encode_month(rec.event.date.month()).expect("calendar month is 1..=12");
    let diurnal_range = rec.tmax - rec.tmin;
    FeatureRow {
        diurnal_range,
        wspd: rec.wspd,
        month_sin,
        month_cos,
        ndvi: rec.ndvi,
        wspd_prcp: rec.wspd * rec.prcp,
        ndvi_prcp: rec.ndvi * rec.prcp,
        range_prcp: diurnal_range * rec.prcp,
        region: rec.region,
        distance_m: rec.distance_m,
        tmin: rec.tmin,
        tmax: rec.tmax,
        tavg: rec.tavg,
        prcp: rec.prcp,
        frp_capped,
        label: scheme.label(frp_capped),
    }
}

/// Stratified train/test split parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

/// Stratified split on labels. Per-class test counts are
/// `round(test_fraction * n_c)` clamped so both sides keep at least one row;
/// deterministic in the seed. Returns (train indices, test indices), each
/// ascending.
pub fn split(labels: &[usize], spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::InvalidParam(alloc::format!(
            "test_fraction must be in (0,1), got {}",
            spec.test_fraction
        )));
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput("split on empty labels"));
    }
    let n_classes = labels.iter().max().unwrap() + 1;
    let mut by_class: Vec<Vec<usize>> = alloc::vec![Vec::new(); n_classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y].push(i);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (class, mut idx) in by_class.into_iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        if idx.len() < 2 {
            return Err(Error::ClassTooSmall {
                class,
                count: idx.len(),
                required: 2,
            });
        }
        let mut rng = seeding::rng(seeding::derive(spec.seed, class as u64));
        idx.shuffle(&mut rng);
        let n_test = (math::round(spec.test_fraction * idx.len() as f64) as usize)
            .clamp(1, idx.len() - 1);
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Per-column standardization parameters fit on the training partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Columns the scaler touches.
    pub mask: Vec<bool>,
    /// Masked columns that were constant in the fit data and pass through
    /// unchanged.
    pub constant_cols: Vec<usize>,
}

impl Scaler {
    /// Fit means and population stds over the masked columns of `m`.
    pub fn fit(m: &Matrix, mask: &[bool]) -> Result<Scaler> {
        if m.is_empty() {
            return Err(Error::EmptyInput("scaler fit on empty matrix"));
        }
        assert_eq!(mask.len(), m.n_cols(), "mask width mismatch");
        let n = m.n_rows() as f64;
        let mut means = alloc::vec![0.0; m.n_cols()];
        let mut stds = alloc::vec![1.0; m.n_cols()];
        let mut constant_cols = Vec::new();
        for j in 0..m.n_cols() {
            if !mask[j] {
                continue;
            }
            let mean = (0..m.n_rows()).map(|i| m.get(i, j)).sum::<f64>() / n;
            let var = (0..m.n_rows())
                .map(|i| {
                    let d = m.get(i, j) - mean;
                    d * d
                })
                .sum::<f64>()
                / n;
            let std = math::sqrt(var);
            if std == 0.0 {
                constant_cols.push(j);
            } else {
                means[j] = mean;
                stds[j] = std;
            }
        }
        Ok(Scaler {
            means,
            stds,
            mask: mask.to_vec(),
            constant_cols,
        })
    }

    pub fn apply(&self, m: &mut Matrix) {
        for i in 0..m.n_rows() {
            let row = m.row_mut(i);
            for (j, v) in row.iter_mut().enumerate() {
                if self.mask[j] {
                    *v = (*v - self.means[j]) / self.stds[j];
                }
            }
        }
    }

    pub fn invert(&self, m: &mut Matrix) {
        for i in 0..m.n_rows() {
            let row = m.row_mut(i);
            for (j, v) in row.iter_mut().enumerate() {
                if self.mask[j] {
                    *v = *v * self.stds[j] + self.means[j];
                }
            }
        }
    }
}

/// Everything the training stages need from a fused dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prepared {
    pub manifest: FeatureManifest,
    pub train: Matrix,
    pub test: Matrix,
    pub y_train: Vec<usize>,
    pub y_test: Vec<usize>,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub frp_cap: f64,
    pub frp_capped: Vec<f64>,
    pub scaler: Scaler,
    pub class_names: Vec<String>,
}

/// Cap FRP, label, engineer, split, and scale a fused dataset. The scaler is
/// fit on the training partition only and then applied to both sides.
pub fn prepare(
    records: &[FusedRecord],
    config: &FeatureConfig,
    scheme: &LabelScheme,
    split_spec: &SplitSpec,
) -> Result<Prepared> {
    scheme.validate()?;
    if records.is_empty() {
        return Err(Error::EmptyInput("prepare on empty fused dataset"));
    }
    let frp: Vec<f64> = records.iter().map(|r| r.event.frp).collect();
    let (frp_cap, frp_capped) = cap_percentile(&frp, config.cap_quantile)?;

    let rows: Vec<FeatureRow> = records
        .iter()
        .zip(&frp_capped)
        .map(|(r, &f)| engineer(r, f, scheme))
        .collect();
    let labels: Vec<usize> = rows
        .iter()
        .map(|r| r.label.index(scheme.n_classes()))
        .collect();

    let matrix = Matrix::from_rows(&rows.iter().map(|r| r.to_row(config)).collect::<Vec<_>>());
    let (train_idx, test_idx) = split(&labels, split_spec)?;

    let mut train = matrix.select_rows(&train_idx);
    let mut test = matrix.select_rows(&test_idx);
    let scaler = Scaler::fit(&train, &scaled_mask(config))?;
    scaler.apply(&mut train);
    scaler.apply(&mut test);

    Ok(Prepared {
        manifest: FeatureManifest::new(feature_names(config)),
        y_train: train_idx.iter().map(|&i| labels[i]).collect(),
        y_test: test_idx.iter().map(|&i| labels[i]).collect(),
        train,
        test,
        train_idx,
        test_idx,
        frp_cap,
        frp_capped,
        scaler,
        class_names: scheme.class_names().iter().map(|s| s.to_string()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn month_axis_points_are_exact() {
        assert_eq!(encode_month(12).unwrap(), (0.0, 1.0));
        assert_eq!(encode_month(3).unwrap(), (1.0, 0.0));
        assert_eq!(encode_month(6).unwrap(), (0.0, -1.0));
        assert_eq!(encode_month(9).unwrap(), (-1.0, 0.0));
        assert!(encode_month(0).is_err());
        assert!(encode_month(13).is_err());
    }

    #[test]
    fn month_encoding_sits_on_unit_circle() {
        for m in 1..=12 {
            let (s, c) = encode_month(m).unwrap();
            assert!((s * s + c * c - 1.0).abs() <= 1e-12, "month {m}");
        }
    }

    #[test]
    fn cap_of_equal_values_is_identity() {
        let (cap, capped) = cap_percentile(&[7.0; 5], 0.99).unwrap();
        assert_eq!(cap, 7.0);
        assert_eq!(capped, vec![7.0; 5]);
    }

    #[test]
    fn cap_interpolates_between_order_statistics() {
        let values: Vec<f64> = (1..=100).map(f64::from).collect();
        let (cap, capped) = cap_percentile(&values, 0.99).unwrap();
        assert!((cap - 99.01).abs() < 1e-12, "{cap}");
        // only the maximum is altered
        assert_eq!(capped.iter().filter(|&&v| v == 99.01).count(), 1);
        assert_eq!(
            values.iter().zip(&capped).filter(|(a, b)| a != b).count(),
            1
        );
    }

    #[test]
    fn cap_singleton() {
        let (cap, capped) = cap_percentile(&[5.0], 0.99).unwrap();
        assert_eq!(cap, 5.0);
        assert_eq!(capped, vec![5.0]);
        assert!(cap_percentile(&[], 0.99).is_err());
    }

    #[test]
    fn reapplying_the_cap_is_a_no_op() {
        let values: Vec<f64> = (1..=100).map(f64::from).collect();
        let (cap, capped) = cap_percentile(&values, 0.99).unwrap();
        let again: Vec<f64> = capped.iter().map(|v| v.min(cap)).collect();
        assert_eq!(capped, again);
    }

    #[test]
    fn two_class_boundary_is_inclusive_low() {
        let scheme = LabelScheme::default();
        assert_eq!(scheme.label(40.0), RiskClass::Low);
        assert_eq!(scheme.label(40.01), RiskClass::High);
        assert_eq!(scheme.label(0.0), RiskClass::Low);
    }

    #[test]
    fn three_class_cut_points() {
        let scheme = LabelScheme::ThreeClass { t1: 40.0, t2: 100.0 };
        assert_eq!(scheme.label(40.0), RiskClass::Low);
        assert_eq!(scheme.label(70.0), RiskClass::Medium);
        assert_eq!(scheme.label(100.5), RiskClass::High);
        assert!(LabelScheme::ThreeClass { t1: 5.0, t2: 5.0 }.validate().is_err());
    }

    #[test]
    fn label_is_monotone_in_frp() {
        let scheme = LabelScheme::ThreeClass { t1: 40.0, t2: 100.0 };
        let mut prev = 0;
        for i in 0..2000 {
            let frp = i as f64 * 0.1;
            let c = scheme.class_index(frp);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn split_is_exactly_stratified_and_deterministic() {
        let labels: Vec<usize> = core::iter::repeat(0)
            .take(100)
            .chain(core::iter::repeat(1).take(100))
            .collect();
        let spec = SplitSpec {
            test_fraction: 0.2,
            seed: 11,
        };
        let (train, test) = split(&labels, &spec).unwrap();
        assert_eq!(test.iter().filter(|&&i| labels[i] == 0).count(), 20);
        assert_eq!(test.iter().filter(|&&i| labels[i] == 1).count(), 20);
        assert_eq!(train.len() + test.len(), 200);
        let (train2, test2) = split(&labels, &spec).unwrap();
        assert_eq!(train, train2);
        assert_eq!(test, test2);
        // disjoint and exhaustive
        let mut all: Vec<usize> = train.iter().chain(test.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..200).collect::<Vec<_>>());
    }

    #[test]
    fn split_rejects_tiny_classes() {
        assert!(matches!(
            split(&[0, 0, 1], &SplitSpec::default()),
            Err(Error::ClassTooSmall { class: 1, .. })
        ));
    }

    #[test]
    fn scaler_centers_and_roundtrips() {
        let m = Matrix::from_rows(&[vec![1.0, 5.0], vec![3.0, 5.0], vec![5.0, 5.0]]);
        let scaler = Scaler::fit(&m, &[true, true]).unwrap();
        assert_eq!(scaler.constant_cols, vec![1]);
        let mut scaled = m.clone();
        scaler.apply(&mut scaled);
        // column mean maps to 0; constant column passes through unchanged
        assert!((scaled.column(0).iter().sum::<f64>()).abs() < 1e-12);
        assert_eq!(scaled.column(1), vec![5.0, 5.0, 5.0]);
        let mut back = scaled.clone();
        scaler.invert(&mut back);
        for (a, b) in back.data().iter().zip(m.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
