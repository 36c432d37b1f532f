//! Feedforward multilayer perceptron with a softmax head, cross-entropy plus
//! L2 loss, and seeded mini-batch Adam training.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;
use crate::math;
use crate::seeding;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_layers: Vec<usize>,
    pub activation: Activation,
    pub l2_alpha: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_layers: alloc::vec![100, 100, 50],
            activation: Activation::Relu,
            l2_alpha: 1e-4,
            learning_rate: 1e-3,
            batch_size: 64,
            max_epochs: 30,
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_layers.is_empty() || self.hidden_layers.iter().any(|&w| w == 0) {
            return Err(Error::InvalidParam(
                "hidden_layers must be non-empty with all widths >= 1".into(),
            ));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::InvalidParam("batch_size and max_epochs must be >= 1".into()));
        }
        if self.l2_alpha < 0.0 || self.learning_rate <= 0.0 {
            return Err(Error::InvalidParam(
                "l2_alpha must be >= 0 and learning_rate > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Weights live in one flat vector: per layer, a row-major `in x out` weight
/// block followed by `out` biases. The flat layout keeps Adam, serialization,
/// and finite-difference checks trivial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub config: MlpConfig,
    pub n_classes: usize,
    /// (fan_in, fan_out) per layer.
    pub dims: Vec<(usize, usize)>,
    pub params: Vec<f64>,
    /// Full-train loss after each epoch.
    pub loss_history: Vec<f64>,
}

fn layer_sizes(dims: &[(usize, usize)]) -> Vec<usize> {
    dims.iter().map(|&(i, o)| i * o + o).collect()
}

fn activate(act: Activation, z: f64) -> f64 {
    match act {
        Activation::Relu => z.max(0.0),
        Activation::Tanh => {
            // tanh via the stable logistic identity
            2.0 * math::sigmoid(2.0 * z) - 1.0
        }
    }
}

/// Derivative expressed through the activation output.
fn activate_grad(act: Activation, a: f64) -> f64 {
    match act {
        Activation::Relu => {
            if a > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        Activation::Tanh => 1.0 - a * a,
    }
}

impl MlpModel {
    /// Forward pass returning per-layer activations (last one is softmax).
    fn forward(&self, params: &[f64], row: &[f64]) -> Vec<Vec<f64>> {
        let mut acts: Vec<Vec<f64>> = alloc::vec![row.to_vec()];
        let mut offset = 0;
        for (l, &(fan_in, fan_out)) in self.dims.iter().enumerate() {
            let w = &params[offset..offset + fan_in * fan_out];
            let b = &params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            offset += fan_in * fan_out + fan_out;
            let prev = acts.last().unwrap();
            let mut z = b.to_vec();
            for (i, &a) in prev.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let wrow = &w[i * fan_out..(i + 1) * fan_out];
                for (zj, &wij) in z.iter_mut().zip(wrow) {
                    *zj += a * wij;
                }
            }
            let last = l == self.dims.len() - 1;
            if last {
                // softmax, stabilized
                let m = z.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
                let mut sum = 0.0;
                for v in &mut z {
                    *v = math::exp(*v - m);
                    sum += *v;
                }
                for v in &mut z {
                    *v /= sum;
                }
            } else {
                for v in &mut z {
                    *v = activate(self.config.activation, *v);
                }
            }
            acts.push(z);
        }
        acts
    }

    pub fn predict_proba_row(&self, row: &[f64]) -> Vec<f64> {
        self.forward(&self.params, row).pop().unwrap()
    }

    /// Mean cross-entropy over `rows` plus the L2 penalty, with the gradient
    /// w.r.t. `params`. Exposed so gradients can be checked against finite
    /// differences.
    pub fn loss_and_grad(
        &self,
        params: &[f64],
        x: &Matrix,
        y: &[usize],
        rows: &[usize],
    ) -> (f64, Vec<f64>) {
        let sizes = layer_sizes(&self.dims);
        let offsets: Vec<usize> = sizes
            .iter()
            .scan(0usize, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect();
        let mut grad = alloc::vec![0.0; params.len()];
        let mut loss = 0.0;
        let batch = rows.len() as f64;
        for &r in rows {
            let acts = self.forward(params, x.row(r));
            let probs = acts.last().unwrap();
            loss += -math::ln(probs[y[r]].max(1e-15));
            // delta at the softmax pre-activation
            let mut delta: Vec<f64> = probs.clone();
            delta[y[r]] -= 1.0;
            for v in &mut delta {
                *v /= batch;
            }
            for l in (0..self.dims.len()).rev() {
                let (fan_in, fan_out) = self.dims[l];
                let o = offsets[l];
                let input = &acts[l];
                // accumulate dW and db
                for i in 0..fan_in {
                    let a = input[i];
                    if a != 0.0 {
                        let gw = &mut grad[o + i * fan_out..o + (i + 1) * fan_out];
                        for (g, &d) in gw.iter_mut().zip(&delta) {
                            *g += a * d;
                        }
                    }
                }
                let gb = &mut grad[o + fan_in * fan_out..o + fan_in * fan_out + fan_out];
                for (g, &d) in gb.iter_mut().zip(&delta) {
                    *g += d;
                }
                if l > 0 {
                    let w = &params[o..o + fan_in * fan_out];
                    let mut prev_delta = alloc::vec![0.0; fan_in];
                    for (i, pd) in prev_delta.iter_mut().enumerate() {
                        let wrow = &w[i * fan_out..(i + 1) * fan_out];
                        *pd = wrow.iter().zip(&delta).map(|(w, d)| w * d).sum::<f64>()
                            * activate_grad(self.config.activation, input[i]);
                    }
                    delta = prev_delta;
                }
            }
        }
        loss /= batch;
        // L2 penalty on weights only
        let mut offset = 0;
        for &(fan_in, fan_out) in &self.dims {
            for k in 0..fan_in * fan_out {
                let w = params[offset + k];
                loss += 0.5 * self.config.l2_alpha * w * w;
                grad[offset + k] += self.config.l2_alpha * w;
            }
            offset += fan_in * fan_out + fan_out;
        }
        (loss, grad)
    }
}

/// Seed-fixed initialization: He normal for relu, Glorot uniform for tanh,
/// zero biases.
fn init_params(dims: &[(usize, usize)], activation: Activation, seed: u64) -> Vec<f64> {
    let mut rng = seeding::rng(seed);
    let mut params = Vec::new();
    let mut normal_spare: Option<f64> = None;
    let mut draw_normal = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 {
        if let Some(v) = normal_spare.take() {
            return v;
        }
        // Box-Muller
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen();
        let r = math::sqrt(-2.0 * math::ln(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        normal_spare = Some(r * math::sin(theta));
        r * math::cos(theta)
    };
    for &(fan_in, fan_out) in dims {
        match activation {
            Activation::Relu => {
                let std = math::sqrt(2.0 / fan_in as f64);
                for _ in 0..fan_in * fan_out {
                    params.push(std * draw_normal(&mut rng));
                }
            }
            Activation::Tanh => {
                let limit = math::sqrt(6.0 / (fan_in + fan_out) as f64);
                for _ in 0..fan_in * fan_out {
                    params.push(rng.gen_range(-limit..limit));
                }
            }
        }
        for _ in 0..fan_out {
            params.push(0.0);
        }
    }
    params
}

/// Train an MLP with mini-batch Adam. Expects standardized inputs.
pub fn fit_mlp(x: &Matrix, y: &[usize], n_classes: usize, config: &MlpConfig) -> Result<MlpModel> {
    config.validate()?;
    if x.is_empty() {
        return Err(Error::EmptyInput("fit_mlp"));
    }
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    let mut dims = Vec::new();
    let mut fan_in = x.n_cols();
    for &h in &config.hidden_layers {
        dims.push((fan_in, h));
        fan_in = h;
    }
    dims.push((fan_in, n_classes));

    let mut model = MlpModel {
        config: config.clone(),
        n_classes,
        params: init_params(&dims, config.activation, config.seed),
        dims,
        loss_history: Vec::new(),
    };

    let n_params = model.params.len();
    let mut m = alloc::vec![0.0; n_params];
    let mut v = alloc::vec![0.0; n_params];
    let (beta1, beta2, eps) = (0.9, 0.999, 1e-8);
    let mut t = 0usize;
    let mut order: Vec<usize> = (0..x.n_rows()).collect();
    let mut rng = seeding::rng(seeding::derive(config.seed, 1));

    let all: Vec<usize> = (0..x.n_rows()).collect();
    for _epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let (_, grad) = model.loss_and_grad(&model.params.clone(), x, y, batch);
            t += 1;
            let bc1 = 1.0 - math::powf(beta1, t as f64);
            let bc2 = 1.0 - math::powf(beta2, t as f64);
            for k in 0..n_params {
                m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k];
                v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k];
                let mhat = m[k] / bc1;
                let vhat = v[k] / bc2;
                model.params[k] -= config.learning_rate * mhat / (math::sqrt(vhat) + eps);
            }
        }
        let (epoch_loss, _) = model.loss_and_grad(&model.params.clone(), x, y, &all);
        model.loss_history.push(epoch_loss);
    }
    Ok(model)
}
