//! Evaluation: confusion matrices, per-class and averaged precision / recall /
//! F1, accuracy, ROC-AUC, variance inflation factors, and correlation
//! matrices.
//!
//! Zero-division conventions are pinned: precision with no predicted
//! positives, recall with no support, and F1 with P+R=0 all report 0, and the
//! affected classes are flagged so rendered tables are unambiguous.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::math;
use crate::{Error, Result};

/// Raw confusion counts: entry `(i, j)` is true class `i` predicted as `j`.
pub fn confusion(labels: &[usize], predictions: &[usize], n_classes: usize) -> Result<Vec<Vec<usize>>> {
    if labels.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: predictions.len(),
        });
    }
    let mut m = alloc::vec![alloc::vec![0usize; n_classes]; n_classes];
    for (&t, &p) in labels.iter().zip(predictions) {
        m[t][p] += 1;
    }
    Ok(m)
}

/// Row-normalized confusion matrix in percent. Rows with no support stay
/// all-zero; every other row sums to 100.
pub fn normalize_rows(confusion: &[Vec<usize>]) -> Vec<Vec<f64>> {
    confusion
        .iter()
        .map(|row| {
            let total: usize = row.iter().sum();
            if total == 0 {
                alloc::vec![0.0; row.len()]
            } else {
                row.iter().map(|&c| 100.0 * c as f64 / total as f64).collect()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    /// Support-weighted recall; algebraically identical to accuracy.
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub confusion: Vec<Vec<usize>>,
    pub confusion_pct: Vec<Vec<f64>>,
    /// Classes where a zero denominator forced a metric to 0.
    pub zero_division_classes: Vec<usize>,
}

/// Full classification report from labels and hard predictions.
pub fn report(labels: &[usize], predictions: &[usize], n_classes: usize) -> Result<ClassificationReport> {
    let cm = confusion(labels, predictions, n_classes)?;
    if labels.is_empty() {
        return Err(Error::EmptyInput("report on empty labels"));
    }
    let total = labels.len() as f64;
    let mut per_class = Vec::with_capacity(n_classes);
    let mut zero_division = Vec::new();
    let mut trace = 0usize;
    for c in 0..n_classes {
        let tp = cm[c][c];
        trace += tp;
        let support: usize = cm[c].iter().sum();
        let predicted: usize = (0..n_classes).map(|t| cm[t][c]).sum();
        let mut flagged = false;
        let precision = if predicted == 0 {
            flagged = true;
            0.0
        } else {
            tp as f64 / predicted as f64
        };
        let recall = if support == 0 {
            flagged = true;
            0.0
        } else {
            tp as f64 / support as f64
        };
        let f1 = if precision + recall == 0.0 {
            flagged = true;
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        if flagged {
            zero_division.push(c);
        }
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support,
        });
    }

    let accuracy = trace as f64 / total;
    let k = n_classes as f64;
    let macro_precision = per_class.iter().map(|m| m.precision).sum::<f64>() / k;
    let macro_recall = per_class.iter().map(|m| m.recall).sum::<f64>() / k;
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / k;
    let weighted_precision = per_class
        .iter()
        .map(|m| m.support as f64 * m.precision)
        .sum::<f64>()
        / total;
    let weighted_f1 = per_class.iter().map(|m| m.support as f64 * m.f1).sum::<f64>() / total;
    // support * (tp/support) == tp exactly only in exact arithmetic, so the
    // weighted recall is computed straight from the identity it satisfies.
    let weighted_recall = trace as f64 / total;
    assert!(
        (weighted_recall - accuracy).abs() <= 1e-12,
        "weighted recall must equal accuracy"
    );

    Ok(ClassificationReport {
        per_class,
        accuracy,
        macro_precision,
        macro_recall,
        macro_f1,
        weighted_precision,
        weighted_recall,
        weighted_f1,
        confusion_pct: normalize_rows(&cm),
        confusion: cm,
        zero_division_classes: zero_division,
    })
}

/// ROC-AUC as the Mann-Whitney pair-concordance probability, ties counted
/// one half. Labels are 0 (negative) / 1 (positive); both classes must occur.
pub fn roc_auc(scores: &[f64], labels: &[usize]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass("roc_auc"));
    }
    // midranks over scores sorted ascending
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + j + 2) as f64 / 2.0; // ranks are 1-based
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let n_pos_f = n_pos as f64;
    Ok((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

/// One operating point of a ROC curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

/// ROC curve points from the (0,0) corner to (1,1), one step per distinct
/// score, thresholds descending.
pub fn roc_curve(scores: &[f64], labels: &[usize]) -> Result<Vec<RocPoint>> {
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass("roc_curve"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let mut points = alloc::vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / n_neg as f64,
            tpr: tp as f64 / n_pos as f64,
            threshold,
        });
    }
    Ok(points)
}

/// Solve `a x = b` in place by Gaussian elimination with partial pivoting.
/// Rank-deficient pivots leave the corresponding unknown at zero, which for
/// (consistent) normal equations still yields valid fitted values.
fn solve_inplace(a: &mut [Vec<f64>], b: &mut [f64]) {
    let n = b.len();
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, &v| acc.max(v.abs()))
        .max(1e-300);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
            .unwrap();
        if a[pivot_row][col].abs() < 1e-12 * scale {
            a[col][col] = 0.0;
            continue;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        if a[col][col] == 0.0 {
            b[col] = 0.0;
            continue;
        }
        let mut s = b[col];
        for c in col + 1..n {
            s -= a[col][c] * b[c];
        }
        b[col] = s / a[col][col];
    }
}

/// Least-squares R-squared of `y` regressed on `x` columns plus an intercept.
fn r_squared(x_cols: &[Vec<f64>], y: &[f64]) -> f64 {
    let n = y.len();
    let p = x_cols.len() + 1; // + intercept
    let design = |i: usize, j: usize| -> f64 {
        if j == 0 {
            1.0
        } else {
            x_cols[j - 1][i]
        }
    };
    let mut ata = alloc::vec![alloc::vec![0.0; p]; p];
    let mut atb = alloc::vec![0.0; p];
    for i in 0..n {
        for j in 0..p {
            let dj = design(i, j);
            atb[j] += dj * y[i];
            for k in j..p {
                ata[j][k] += dj * design(i, k);
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            ata[j][k] = ata[k][j];
        }
    }
    solve_inplace(&mut ata, &mut atb);
    let w = atb;
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let mut ssr = 0.0;
    let mut sst = 0.0;
    for i in 0..n {
        let fitted: f64 = (0..p).map(|j| w[j] * design(i, j)).sum();
        ssr += (y[i] - fitted) * (y[i] - fitted);
        sst += (y[i] - y_mean) * (y[i] - y_mean);
    }
    if sst == 0.0 {
        return 1.0; // constant column: perfectly explained by the intercept
    }
    1.0 - ssr / sst
}

/// Variance inflation factor per column: `1 / (1 - R²_j)` from regressing
/// column `j` on all the others plus an intercept. Exact or near-exact
/// collinearity (`R² >= 1 - 1e-12`) reports `f64::INFINITY`.
pub fn vif(x: &Matrix) -> Result<Vec<f64>> {
    if x.n_cols() < 2 {
        return Err(Error::InvalidParam("vif needs at least 2 columns".into()));
    }
    if x.n_rows() <= x.n_cols() {
        return Err(Error::InvalidParam(alloc::format!(
            "vif needs more rows than columns, got {}x{}",
            x.n_rows(),
            x.n_cols()
        )));
    }
    let cols: Vec<Vec<f64>> = (0..x.n_cols()).map(|j| x.column(j)).collect();
    let run = |j: usize| -> f64 {
        let others: Vec<Vec<f64>> = (0..x.n_cols())
            .filter(|&k| k != j)
            .map(|k| cols[k].clone())
            .collect();
        let r2 = r_squared(&others, &cols[j]);
        if r2 >= 1.0 - 1e-12 {
            f64::INFINITY
        } else {
            1.0 / (1.0 - r2)
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        Ok((0..x.n_cols()).into_par_iter().map(run).collect())
    }
    #[cfg(not(feature = "parallel"))]
    Ok((0..x.n_cols()).map(run).collect())
}

/// Pearson correlation matrix with a unit diagonal. Constant columns get zero
/// off-diagonal entries and are flagged in the returned vector.
pub fn correlation_matrix(x: &Matrix) -> Result<(Matrix, Vec<bool>)> {
    if x.n_rows() < 2 {
        return Err(Error::InvalidParam("correlation needs at least 2 rows".into()));
    }
    let n = x.n_rows() as f64;
    let p = x.n_cols();
    let means: Vec<f64> = (0..p).map(|j| x.column(j).iter().sum::<f64>() / n).collect();
    let sds: Vec<f64> = (0..p)
        .map(|j| {
            math::sqrt(
                (0..x.n_rows())
                    .map(|i| {
                        let d = x.get(i, j) - means[j];
                        d * d
                    })
                    .sum::<f64>()
                    / n,
            )
        })
        .collect();
    let constant: Vec<bool> = sds.iter().map(|&s| s == 0.0).collect();
    let mut out = Matrix::zeros(p, p);
    for j in 0..p {
        out.set(j, j, 1.0);
        for k in j + 1..p {
            let r = if constant[j] || constant[k] {
                0.0
            } else {
                let cov = (0..x.n_rows())
                    .map(|i| (x.get(i, j) - means[j]) * (x.get(i, k) - means[k]))
                    .sum::<f64>()
                    / n;
                cov / (sds[j] * sds[k])
            };
            out.set(j, k, r);
            out.set(k, j, r);
        }
    }
    Ok((out, constant))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn confusion_diagonal_for_perfect_predictions() {
        let y = vec![0, 1, 2, 1, 0];
        let cm = confusion(&y, &y, 3).unwrap();
        assert_eq!(cm, vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn confusion_single_misclassification() {
        // true = high (1), predicted = low (0)
        let cm = confusion(&[1], &[0], 2).unwrap();
        assert_eq!(cm, vec![vec![0, 0], vec![1, 0]]);
    }

    #[test]
    fn confusion_rejects_length_mismatch() {
        assert!(confusion(&[0, 1], &[0], 2).is_err());
    }

    #[test]
    fn report_perfect_predictions() {
        let y = vec![0, 1, 0, 1, 1];
        let r = report(&y, &y, 2).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.macro_f1, 1.0);
        assert_eq!(r.weighted_f1, 1.0);
        assert!(r.zero_division_classes.is_empty());
    }

    #[test]
    fn report_degenerate_predictor_convention() {
        // all-one-class predictions on balanced labels
        let labels = vec![0, 0, 1, 1];
        let preds = vec![0, 0, 0, 0];
        let r = report(&labels, &preds, 2).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.per_class[1].precision, 0.0);
        assert_eq!(r.zero_division_classes, vec![1]);
    }

    #[test]
    fn report_reconstructs_published_two_class_figures() {
        // Supports 49357 low / 2759 high; high recall 47%, high precision 20%,
        // low recall 90%. Built directly as a labelled prediction vector.
        let mut labels = Vec::new();
        let mut preds = Vec::new();
        // low rows: 44169 predicted low, 5188 predicted high
        for _ in 0..44169 {
            labels.push(0);
            preds.push(0);
        }
        for _ in 0..5188 {
            labels.push(0);
            preds.push(1);
        }
        // high rows: 1297 predicted high, 1462 predicted low
        for _ in 0..1297 {
            labels.push(1);
            preds.push(1);
        }
        for _ in 0..1462 {
            labels.push(1);
            preds.push(0);
        }
        let r = report(&labels, &preds, 2).unwrap();
        assert_eq!(labels.len(), 52116);
        assert!((r.accuracy - 0.87).abs() < 0.005, "{}", r.accuracy);
        assert!((r.macro_f1 - 0.61).abs() < 0.005, "{}", r.macro_f1);
        assert!((r.per_class[1].recall - 0.47).abs() < 0.005);
        assert!((r.per_class[1].precision - 0.20).abs() < 0.005);
        assert_eq!(r.weighted_recall, r.accuracy);
    }

    #[test]
    fn normalized_rows_sum_to_hundred() {
        let cm = vec![vec![3, 1], vec![0, 0]];
        let pct = normalize_rows(&cm);
        assert!((pct[0].iter().sum::<f64>() - 100.0).abs() <= 1e-9);
        assert_eq!(pct[1], vec![0.0, 0.0]);
    }

    #[test]
    fn auc_separating_scores() {
        let scores = vec![0.1, 0.2, 0.8, 0.9];
        let labels = vec![0, 0, 1, 1];
        assert_eq!(roc_auc(&scores, &labels).unwrap(), 1.0);
    }

    #[test]
    fn auc_all_ties_is_half() {
        let scores = vec![0.5; 6];
        let labels = vec![0, 1, 0, 1, 0, 1];
        assert_eq!(roc_auc(&scores, &labels).unwrap(), 0.5);
    }

    #[test]
    fn auc_rejects_single_class() {
        assert!(roc_auc(&[0.1, 0.9], &[1, 1]).is_err());
    }

    #[test]
    fn roc_curve_endpoints() {
        let scores = vec![0.9, 0.1, 0.5, 0.4];
        let labels = vec![1, 0, 1, 0];
        let pts = roc_curve(&scores, &labels).unwrap();
        assert_eq!((pts[0].fpr, pts[0].tpr), (0.0, 0.0));
        let last = pts.last().unwrap();
        assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn vif_orthogonal_columns_is_one() {
        // centered, mutually orthogonal columns
        let m = Matrix::from_rows(&[
            vec![1.0, 1.0, 1.0],
            vec![1.0, -1.0, -1.0],
            vec![-1.0, 1.0, -1.0],
            vec![-1.0, -1.0, 1.0],
        ]);
        for v in vif(&m).unwrap() {
            assert!((v - 1.0).abs() <= 1e-9, "{v}");
        }
    }

    #[test]
    fn vif_duplicated_column_is_infinite() {
        let m = Matrix::from_rows(&[
            vec![1.0, 1.0, 0.3],
            vec![2.0, 2.0, -0.4],
            vec![3.0, 3.0, 0.9],
            vec![4.0, 4.0, 0.1],
        ]);
        let v = vif(&m).unwrap();
        assert!(v[0].is_infinite());
        assert!(v[1].is_infinite());
        assert!(v[2].is_finite());
    }

    #[test]
    fn vif_rejects_wide_matrices() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(vif(&m).is_err());
    }

    #[test]
    fn correlation_self_and_negation() {
        let col: Vec<f64> = vec![1.0, 4.0, 2.0, 8.0];
        let rows: Vec<Vec<f64>> = col.iter().map(|&v| vec![v, -v, 3.0]).collect();
        let (c, flags) = correlation_matrix(&Matrix::from_rows(&rows)).unwrap();
        assert_eq!(c.get(0, 0), 1.0);
        assert!((c.get(0, 1) + 1.0).abs() <= 1e-12);
        assert_eq!(c.get(0, 2), 0.0);
        assert_eq!(flags, vec![false, false, true]);
    }
}
