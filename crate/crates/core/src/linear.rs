//! L2-regularized logistic regression by gradient descent with backtracking
//! line search; multiclass via one-vs-rest. Used standalone and as the
//! stacking meta learner.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    pub l2: f64,
    pub max_iter: usize,
    /// Converged when the gradient max-norm drops below this.
    pub tol: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            l2: 1e-4,
            max_iter: 500,
            tol: 1e-6,
        }
    }
}

/// One binary problem: `params = [w_0..w_{d-1}, intercept]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryLogistic {
    pub params: Vec<f64>,
    pub converged: bool,
}

impl BinaryLogistic {
    pub fn raw_score(&self, row: &[f64]) -> f64 {
        let (w, b) = self.params.split_at(self.params.len() - 1);
        row.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() + b[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub config: LogisticConfig,
    pub n_classes: usize,
    pub binaries: Vec<BinaryLogistic>,
    /// False when any one-vs-rest problem hit max_iter; a warning, not an
    /// error.
    pub converged: bool,
}

impl LogisticModel {
    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        if self.n_classes == 2 {
            let p = math::sigmoid(self.binaries[0].raw_score(row));
            alloc::vec![1.0 - p, p]
        } else {
            let mut probs: Vec<f64> = self
                .binaries
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

/// Mean logistic loss plus `l2/2 * ||w||^2` (intercept unpenalized) and its
/// gradient, at the given parameter vector.
pub fn binary_loss_grad(x: &Matrix, y01: &[f64], params: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let n = x.n_rows() as f64;
    let d = x.n_cols();
    let (w, b) = params.split_at(d);
    let mut loss = 0.0;
    let mut grad = alloc::vec![0.0; d + 1];
    for i in 0..x.n_rows() {
        let row = x.row(i);
        let z = row.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() + b[0];
        loss += math::softplus(z) - y01[i] * z;
        let r = math::sigmoid(z) - y01[i];
        for (g, &xj) in grad[..d].iter_mut().zip(row) {
            *g += r * xj;
        }
        grad[d] += r;
    }
    loss /= n;
    for g in grad.iter_mut() {
        *g /= n;
    }
    for (g, &wj) in grad[..d].iter_mut().zip(w) {
        *g += l2 * wj;
    }
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    (loss, grad)
}

fn fit_binary(x: &Matrix, y01: &[f64], config: &LogisticConfig) -> BinaryLogistic {
    let d = x.n_cols();
    let mut params = alloc::vec![0.0; d + 1];
    let mut converged = false;
    let (mut loss, mut grad) = binary_loss_grad(x, y01, &params, config.l2);
    for _ in 0..config.max_iter {
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax < config.tol {
            converged = true;
            break;
        }
        // backtracking line search on the steepest-descent direction
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        let mut step = 1.0;
        let mut candidate: Vec<f64>;
        loop {
            candidate = params
                .iter()
                .zip(&grad)
                .map(|(p, g)| p - step * g)
                .collect();
            let (new_loss, _) = binary_loss_grad(x, y01, &candidate, config.l2);
            if new_loss <= loss - 0.5 * step * gnorm2 || step < 1e-12 {
                break;
            }
            step *= 0.5;
        }
        params = candidate;
        let lg = binary_loss_grad(x, y01, &params, config.l2);
        loss = lg.0;
        grad = lg.1;
    }
    BinaryLogistic { params, converged }
}

/// Fit logistic regression. Initialization is zero, so the fit is fully
/// deterministic.
pub fn fit_logistic(
    x: &Matrix,
    y: &[usize],
    n_classes: usize,
    config: &LogisticConfig,
) -> Result<LogisticModel> {
    if x.is_empty() {
        return Err(Error::EmptyInput("fit_logistic"));
    }
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    if config.l2 < 0.0 || config.tol <= 0.0 {
        return Err(Error::InvalidParam("l2 must be >= 0 and tol > 0".into()));
    }
    let problems: Vec<usize> = if n_classes == 2 {
        alloc::vec![1]
    } else {
        (0..n_classes).collect()
    };
    let binaries: Vec<BinaryLogistic> = problems
        .iter()
        .map(|&class| {
            let y01: Vec<f64> = y.iter().map(|&c| f64::from(c == class)).collect();
            fit_binary(x, &y01, config)
        })
        .collect();
    let converged = binaries.iter().all(|b| b.converged);
    Ok(LogisticModel {
        config: config.clone(),
        n_classes,
        binaries,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn uninformative_features_give_even_odds() {
        // symmetric design: the zero vector is the exact optimum
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0], vec![4.0]]);
        let y = vec![0, 1, 1, 0];
        let model = fit_logistic(&x, &y, 2, &LogisticConfig::default()).unwrap();
        let b = &model.binaries[0];
        assert!(b.params.iter().all(|p| p.abs() < 1e-4), "{:?}", b.params);
        let p = model.predict_proba_row(&[2.5]);
        assert!((p[1] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn separable_data_stays_finite_and_exact() {
        let x = Matrix::from_rows(&[vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]]);
        let y = vec![0, 0, 1, 1];
        let cfg = LogisticConfig {
            l2: 0.1,
            ..Default::default()
        };
        let model = fit_logistic(&x, &y, 2, &cfg).unwrap();
        assert!(model.binaries[0].params.iter().all(|p| p.is_finite()));
        for (i, &label) in y.iter().enumerate() {
            let p = model.predict_proba_row(x.row(i));
            assert_eq!(usize::from(p[1] > 0.5), label);
        }
    }

    #[test]
    fn multiclass_probabilities_normalize() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i * i % 7) as f64]).collect();
        let y: Vec<usize> = (0..30).map(|i| i / 10).collect();
        let model = fit_logistic(&Matrix::from_rows(&rows), &y, 3, &LogisticConfig::default()).unwrap();
        let p = model.predict_proba_row(&[15.0, 3.0]);
        assert_eq!(p.len(), 3);
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}
