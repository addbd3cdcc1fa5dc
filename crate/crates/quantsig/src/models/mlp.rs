//! Single-hidden-layer perceptron classifier: tanh hidden units, sigmoid
//! output, full-batch binary cross-entropy minimised with Adam.
//!
//! The backward pass is exposed through [`MlpModel::loss_and_gradients`] so
//! tests can verify every analytic gradient against central differences.

use rand::Rng;

use super::{check_width, sigmoid, ModelError, TrainConfig};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const PROB_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// Hidden-layer weights, one row of length `n_inputs` per hidden unit.
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    /// Output weights, one per hidden unit.
    pub w2: Vec<f64>,
    pub b2: f64,
    pub loss_history: Vec<f64>,
}

/// Same shapes as the trainable fields of [`MlpModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl MlpModel {
    pub fn n_inputs(&self) -> usize {
        self.w1[0].len()
    }

    pub fn n_hidden(&self) -> usize {
        self.w1.len()
    }

    fn forward_one(&self, row: &[f64]) -> (Vec<f64>, f64) {
        let hidden: Vec<f64> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(w, b)| (b + w.iter().zip(row).map(|(wi, xi)| wi * xi).sum::<f64>()).tanh())
            .collect();
        let z = self.b2 + self.w2.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>();
        (hidden, sigmoid(z))
    }

    /// Predicted probability of the positive class for each row.
    pub fn scores(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        check_width(self.n_inputs(), rows)?;
        Ok(rows.iter().map(|r| self.forward_one(r).1).collect())
    }

    /// Mean binary cross-entropy over the batch and its exact gradient with
    /// respect to every parameter.
    pub fn loss_and_gradients(&self, x: &[Vec<f64>], y: &[u8]) -> (f64, MlpGradients) {
        let n = x.len() as f64;
        let mut grads = MlpGradients {
            w1: vec![vec![0.0; self.n_inputs()]; self.n_hidden()],
            b1: vec![0.0; self.n_hidden()],
            w2: vec![0.0; self.n_hidden()],
            b2: 0.0,
        };
        let mut loss = 0.0;
        for (row, &label) in x.iter().zip(y) {
            let (hidden, p) = self.forward_one(row);
            let clamped = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            loss -= if label == 1 { clamped.ln() } else { (1.0 - clamped).ln() };

            let dz2 = (p - f64::from(label)) / n;
            grads.b2 += dz2;
            for (g, h) in grads.w2.iter_mut().zip(&hidden) {
                *g += dz2 * h;
            }
            for j in 0..self.n_hidden() {
                let dz1 = dz2 * self.w2[j] * (1.0 - hidden[j] * hidden[j]);
                grads.b1[j] += dz1;
                for (g, xi) in grads.w1[j].iter_mut().zip(row) {
                    *g += dz1 * xi;
                }
            }
        }
        (loss / n, grads)
    }

    fn batch_loss(&self, x: &[Vec<f64>], y: &[u8]) -> f64 {
        let mut loss = 0.0;
        for (row, &label) in x.iter().zip(y) {
            let p = self.forward_one(row).1.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            loss -= if label == 1 { p.ln() } else { (1.0 - p).ln() };
        }
        loss / x.len() as f64
    }

    /// All trainable parameters flattened in a fixed order
    /// (w1 row-major, b1, w2, b2) — the same order `MlpGradients::flat` uses.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for row in &self.w1 {
            out.extend_from_slice(row);
        }
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.push(self.b2);
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) {
        let mut it = flat.iter().copied();
        for row in &mut self.w1 {
            for v in row.iter_mut() {
                *v = it.next().expect("parameter vector too short");
            }
        }
        for v in &mut self.b1 {
            *v = it.next().expect("parameter vector too short");
        }
        for v in &mut self.w2 {
            *v = it.next().expect("parameter vector too short");
        }
        self.b2 = it.next().expect("parameter vector too short");
        assert!(it.next().is_none(), "parameter vector too long");
    }
}

impl MlpGradients {
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for row in &self.w1 {
            out.extend_from_slice(row);
        }
        out.extend_from_slice(&self.b1);
        out.extend_from_slice(&self.w2);
        out.push(self.b2);
        out
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        self.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = ADAM_BETA1 * self.m[i] + (1.0 - ADAM_BETA1) * grads[i];
            self.v[i] = ADAM_BETA2 * self.v[i] + (1.0 - ADAM_BETA2) * grads[i] * grads[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        }
    }
}

pub fn fit(x: &[Vec<f64>], y: &[u8], cfg: &TrainConfig) -> Result<MlpModel, ModelError> {
    if cfg.hidden_size == 0 {
        return Err(ModelError::BadConfig("hidden_size must be at least 1".into()));
    }
    if cfg.epochs == 0 {
        return Err(ModelError::BadConfig("epochs must be at least 1".into()));
    }
    let n_inputs = x[0].len();
    let mut rng = super::seeded_rng(cfg.seed);
    let bound1 = 1.0 / (n_inputs as f64).sqrt();
    let bound2 = 1.0 / (cfg.hidden_size as f64).sqrt();
    let mut model = MlpModel {
        w1: (0..cfg.hidden_size)
            .map(|_| (0..n_inputs).map(|_| rng.gen_range(-bound1..bound1)).collect())
            .collect(),
        b1: vec![0.0; cfg.hidden_size],
        w2: (0..cfg.hidden_size).map(|_| rng.gen_range(-bound2..bound2)).collect(),
        b2: 0.0,
        loss_history: Vec::with_capacity(cfg.epochs),
    };

    let mut params = model.flat_params();
    let mut adam = Adam::new(params.len());
    for epoch in 0..cfg.epochs {
        let (_, grads) = model.loss_and_gradients(x, y);
        adam.step(&mut params, &grads.flat(), cfg.learning_rate);
        model.set_flat_params(&params);
        let loss = model.batch_loss(x, y);
        if !loss.is_finite() {
            return Err(ModelError::DivergedLoss { epoch });
        }
        model.loss_history.push(loss);
    }
    Ok(model)
}
