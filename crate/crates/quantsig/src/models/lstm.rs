//! Univariate single-layer LSTM for next-step close prediction.
//!
//! The series is min-max scaled internally (the scaler lives inside the
//! model so predictions can be mapped back to price units), cut into
//! sliding windows of `window_length` scaled closes, and trained one
//! window at a time with Adam, backpropagation through time, and a global
//! L2 gradient-norm clip. Gate order everywhere is input, forget, output,
//! cell-candidate.

use rand::Rng;

use super::{ModelError, TrainConfig};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const GRAD_CLIP_NORM: f64 = 5.0;
const GATES: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    pub hidden_size: usize,
    pub window_length: usize,
    /// Min-max scaler fitted on the training series; a degenerate range
    /// maps every value to 0.
    pub scale_min: f64,
    pub scale_max: f64,
    /// Per-gate input weights (scalar input ⇒ one weight per hidden unit).
    pub w_x: [Vec<f64>; GATES],
    /// Per-gate recurrent weights, row-major hidden × hidden.
    pub u_h: [Vec<f64>; GATES],
    pub b: [Vec<f64>; GATES],
    /// Output head mapping the final hidden state to one scaled value.
    pub w_out: Vec<f64>,
    pub b_out: f64,
    /// Full-batch scaled-space MSE after each epoch.
    pub loss_history: Vec<f64>,
}

/// Same shapes as the trainable fields of [`LstmModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct LstmGradients {
    pub w_x: [Vec<f64>; GATES],
    pub u_h: [Vec<f64>; GATES],
    pub b: [Vec<f64>; GATES],
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

struct StepCache {
    x: f64,
    gates: [Vec<f64>; GATES], // post-activation i, f, o, g
    tanh_c: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
}

impl LstmModel {
    fn scale(&self, v: f64) -> f64 {
        let range = self.scale_max - self.scale_min;
        if range == 0.0 {
            0.0
        } else {
            (v - self.scale_min) / range
        }
    }

    fn unscale(&self, v: f64) -> f64 {
        self.scale_min + v * (self.scale_max - self.scale_min)
    }

    fn sigmoid(z: f64) -> f64 {
        super::sigmoid(z)
    }

    /// One forward pass over a scaled window; returns the scaled prediction
    /// and, when requested, the per-step cache needed for backprop.
    fn forward_scaled(&self, window: &[f64], want_cache: bool) -> (f64, Vec<StepCache>) {
        let hs = self.hidden_size;
        let mut h = vec![0.0; hs];
        let mut c = vec![0.0; hs];
        let mut caches = Vec::with_capacity(if want_cache { window.len() } else { 0 });
        let mut pre = [vec![0.0; hs], vec![0.0; hs], vec![0.0; hs], vec![0.0; hs]];
        for &x in window {
            for q in 0..GATES {
                let u = &self.u_h[q];
                for j in 0..hs {
                    let row = &u[j * hs..(j + 1) * hs];
                    let recur: f64 = row.iter().zip(&h).map(|(w, hk)| w * hk).sum();
                    pre[q][j] = self.w_x[q][j] * x + recur + self.b[q][j];
                }
            }
            let i_gate: Vec<f64> = pre[0].iter().map(|&z| Self::sigmoid(z)).collect();
            let f_gate: Vec<f64> = pre[1].iter().map(|&z| Self::sigmoid(z)).collect();
            let o_gate: Vec<f64> = pre[2].iter().map(|&z| Self::sigmoid(z)).collect();
            let g_gate: Vec<f64> = pre[3].iter().map(|&z| z.tanh()).collect();

            let c_prev = c.clone();
            let h_prev = h.clone();
            for j in 0..hs {
                c[j] = f_gate[j] * c_prev[j] + i_gate[j] * g_gate[j];
            }
            let tanh_c: Vec<f64> = c.iter().map(|&v| v.tanh()).collect();
            for j in 0..hs {
                h[j] = o_gate[j] * tanh_c[j];
            }
            if want_cache {
                caches.push(StepCache {
                    x,
                    gates: [i_gate, f_gate, o_gate, g_gate],
                    tanh_c,
                    h_prev,
                    c_prev,
                });
            }
        }
        let y = self.b_out + self.w_out.iter().zip(&h).map(|(w, hk)| w * hk).sum::<f64>();
        (y, caches)
    }

    /// Next-step prediction in price units for a window of raw closes.
    pub fn predict_next(&self, window_prices: &[f64]) -> Result<f64, ModelError> {
        if window_prices.len() != self.window_length {
            return Err(ModelError::ShapeMismatch {
                expected: self.window_length,
                found: window_prices.len(),
            });
        }
        let scaled: Vec<f64> = window_prices.iter().map(|&v| self.scale(v)).collect();
        Ok(self.unscale(self.forward_scaled(&scaled, false).0))
    }

    /// Mean squared error in scaled space over the sliding windows of a raw
    /// close series — the quantity `loss_history` records.
    pub fn scaled_mse(&self, closes: &[f64]) -> Result<f64, ModelError> {
        let (windows, targets) = self.windows_of(closes)?;
        Ok(self.batch_loss(&windows, &targets))
    }

    fn windows_of(&self, closes: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>), ModelError> {
        if closes.len() <= self.window_length {
            return Err(ModelError::SeriesTooShort {
                len: closes.len(),
                window: self.window_length,
            });
        }
        let scaled: Vec<f64> = closes.iter().map(|&v| self.scale(v)).collect();
        let mut windows = Vec::new();
        let mut targets = Vec::new();
        for t in 0..scaled.len() - self.window_length {
            windows.push(scaled[t..t + self.window_length].to_vec());
            targets.push(scaled[t + self.window_length]);
        }
        Ok((windows, targets))
    }

    fn batch_loss(&self, windows: &[Vec<f64>], targets: &[f64]) -> f64 {
        let sse: f64 = windows
            .iter()
            .zip(targets)
            .map(|(w, &t)| {
                let d = self.forward_scaled(w, false).0 - t;
                d * d
            })
            .sum();
        sse / windows.len() as f64
    }

    /// Mean squared error over scaled windows and its exact gradient via
    /// backpropagation through time.
    pub fn loss_and_gradients(
        &self,
        windows: &[Vec<f64>],
        targets: &[f64],
    ) -> (f64, LstmGradients) {
        let hs = self.hidden_size;
        let zero_gate = || [vec![0.0; hs], vec![0.0; hs], vec![0.0; hs], vec![0.0; hs]];
        let mut grads = LstmGradients {
            w_x: zero_gate(),
            u_h: [
                vec![0.0; hs * hs],
                vec![0.0; hs * hs],
                vec![0.0; hs * hs],
                vec![0.0; hs * hs],
            ],
            b: zero_gate(),
            w_out: vec![0.0; hs],
            b_out: 0.0,
        };
        let n = windows.len() as f64;
        let mut loss = 0.0;
        for (window, &target) in windows.iter().zip(targets) {
            let (y, caches) = self.forward_scaled(window, true);
            let diff = y - target;
            loss += diff * diff;

            let dy = 2.0 * diff / n;
            let h_last = caches
                .last()
                .map(|s| {
                    (0..hs).map(|j| s.gates[2][j] * s.tanh_c[j]).collect::<Vec<f64>>()
                })
                .unwrap_or_else(|| vec![0.0; hs]);
            for j in 0..hs {
                grads.w_out[j] += dy * h_last[j];
            }
            grads.b_out += dy;

            let mut dh: Vec<f64> = self.w_out.iter().map(|w| dy * w).collect();
            let mut dc = vec![0.0; hs];
            for step in caches.iter().rev() {
                let [i_gate, f_gate, o_gate, g_gate] = &step.gates;
                let mut dpre = [vec![0.0; hs], vec![0.0; hs], vec![0.0; hs], vec![0.0; hs]];
                for j in 0..hs {
                    let do_out = dh[j] * step.tanh_c[j];
                    let dc_j = dc[j] + dh[j] * o_gate[j] * (1.0 - step.tanh_c[j] * step.tanh_c[j]);
                    let di = dc_j * g_gate[j];
                    let df = dc_j * step.c_prev[j];
                    let dg = dc_j * i_gate[j];
                    dpre[0][j] = di * i_gate[j] * (1.0 - i_gate[j]);
                    dpre[1][j] = df * f_gate[j] * (1.0 - f_gate[j]);
                    dpre[2][j] = do_out * o_gate[j] * (1.0 - o_gate[j]);
                    dpre[3][j] = dg * (1.0 - g_gate[j] * g_gate[j]);
                    dc[j] = dc_j * f_gate[j]; // flows to c_{t−1}
                }
                let mut dh_prev = vec![0.0; hs];
                for q in 0..GATES {
                    for j in 0..hs {
                        let d = dpre[q][j];
                        grads.w_x[q][j] += d * step.x;
                        grads.b[q][j] += d;
                        let grow = &mut grads.u_h[q][j * hs..(j + 1) * hs];
                        let urow = &self.u_h[q][j * hs..(j + 1) * hs];
                        for k in 0..hs {
                            grow[k] += d * step.h_prev[k];
                            dh_prev[k] += d * urow[k];
                        }
                    }
                }
                dh = dh_prev;
            }
        }
        (loss / n, grads)
    }

    /// All trainable parameters in the fixed order w_x, u_h, b per gate,
    /// then output head — matching [`LstmGradients::flat`].
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for q in 0..GATES {
            out.extend_from_slice(&self.w_x[q]);
            out.extend_from_slice(&self.u_h[q]);
            out.extend_from_slice(&self.b[q]);
        }
        out.extend_from_slice(&self.w_out);
        out.push(self.b_out);
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) {
        let mut at = 0usize;
        let copy = |dst: &mut Vec<f64>, at: &mut usize| {
            let n = dst.len();
            dst.copy_from_slice(&flat[*at..*at + n]);
            *at += n;
        };
        for q in 0..GATES {
            copy(&mut self.w_x[q], &mut at);
            copy(&mut self.u_h[q], &mut at);
            copy(&mut self.b[q], &mut at);
        }
        copy(&mut self.w_out, &mut at);
        self.b_out = flat[at];
        at += 1;
        assert_eq!(at, flat.len(), "parameter vector length mismatch");
    }
}

impl LstmGradients {
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for q in 0..GATES {
            out.extend_from_slice(&self.w_x[q]);
            out.extend_from_slice(&self.u_h[q]);
            out.extend_from_slice(&self.b[q]);
        }
        out.extend_from_slice(&self.w_out);
        out.push(self.b_out);
        out
    }

    fn clip_to_norm(flat: &mut [f64], max_norm: f64) {
        let norm = flat.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm > max_norm {
            let scale = max_norm / norm;
            for g in flat {
                *g *= scale;
            }
        }
    }
}

pub fn fit_lstm(closes: &[f64], cfg: &TrainConfig) -> Result<LstmModel, ModelError> {
    if cfg.hidden_size == 0 {
        return Err(ModelError::BadConfig("hidden_size must be at least 1".into()));
    }
    if closes.len() <= cfg.window_length {
        return Err(ModelError::SeriesTooShort { len: closes.len(), window: cfg.window_length });
    }
    let hs = cfg.hidden_size;
    let mut rng = super::seeded_rng(cfg.seed);
    let bound = 1.0 / (hs as f64).sqrt();
    let mut rand_vec = |n: usize| -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-bound..bound)).collect()
    };
    let (min, max) = closes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mut model = LstmModel {
        hidden_size: hs,
        window_length: cfg.window_length,
        scale_min: min,
        scale_max: max,
        w_x: [rand_vec(hs), rand_vec(hs), rand_vec(hs), rand_vec(hs)],
        u_h: [
            rand_vec(hs * hs),
            rand_vec(hs * hs),
            rand_vec(hs * hs),
            rand_vec(hs * hs),
        ],
        b: [vec![0.0; hs], vec![0.0; hs], vec![0.0; hs], vec![0.0; hs]],
        w_out: rand_vec(hs),
        b_out: 0.0,
        loss_history: Vec::with_capacity(cfg.epochs),
    };

    let (windows, targets) = model.windows_of(closes)?;
    let mut params = model.flat_params();
    let mut m_state = vec![0.0; params.len()];
    let mut v_state = vec![0.0; params.len()];
    let mut t: u64 = 0;
    for epoch in 0..cfg.epochs {
        for (window, &target) in windows.iter().zip(&targets) {
            let (_, grads) =
                model.loss_and_gradients(std::slice::from_ref(window), &[target]);
            let mut flat = grads.flat();
            LstmGradients::clip_to_norm(&mut flat, GRAD_CLIP_NORM);
            t += 1;
            let bc1 = 1.0 - ADAM_BETA1.powi(t.min(1_000_000) as i32);
            let bc2 = 1.0 - ADAM_BETA2.powi(t.min(1_000_000) as i32);
            for idx in 0..params.len() {
                m_state[idx] = ADAM_BETA1 * m_state[idx] + (1.0 - ADAM_BETA1) * flat[idx];
                v_state[idx] =
                    ADAM_BETA2 * v_state[idx] + (1.0 - ADAM_BETA2) * flat[idx] * flat[idx];
                let m_hat = m_state[idx] / bc1;
                let v_hat = v_state[idx] / bc2;
                params[idx] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
            model.set_flat_params(&params);
        }
        let loss = model.batch_loss(&windows, &targets);
        if !loss.is_finite() {
            return Err(ModelError::DivergedLoss { epoch });
        }
        model.loss_history.push(loss);
    }
    Ok(model)
}
