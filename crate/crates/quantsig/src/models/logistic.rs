//! Logistic regression trained by full-batch gradient descent on the
//! L2-regularized log-loss.

use super::{check_width, sigmoid, ModelError, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Regularized log-loss after each epoch of the accepted run.
    pub loss_history: Vec<f64>,
}

impl LogisticModel {
    /// Class-1 probabilities.
    pub fn scores(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        check_width(self.weights.len(), rows)?;
        Ok(rows
            .iter()
            .map(|row| {
                sigmoid(self.bias + row.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>())
            })
            .collect())
    }
}

fn loss(x: &[Vec<f64>], y: &[u8], w: &[f64], b: f64, l2: f64) -> f64 {
    let n = x.len() as f64;
    let mut total = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let p = sigmoid(b + row.iter().zip(w).map(|(x, w)| x * w).sum::<f64>())
            .clamp(1e-12, 1.0 - 1e-12);
        total -= if label == 1 { p.ln() } else { (1.0 - p).ln() };
    }
    total / n + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

fn run(x: &[Vec<f64>], y: &[u8], cfg: &TrainConfig, lr: f64) -> (LogisticModel, bool) {
    let p = x[0].len();
    let n = x.len() as f64;
    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut prev = loss(x, y, &w, b, cfg.l2);
    let mut monotone = true;
    for _ in 0..cfg.epochs {
        let mut grad_w = vec![0.0; p];
        let mut grad_b = 0.0;
        for (row, &label) in x.iter().zip(y) {
            let pred = sigmoid(b + row.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>());
            let err = pred - f64::from(label);
            for (g, v) in grad_w.iter_mut().zip(row) {
                *g += err * v;
            }
            grad_b += err;
        }
        for (wj, g) in w.iter_mut().zip(&grad_w) {
            *wj -= lr * (g / n + cfg.l2 * *wj);
        }
        b -= lr * grad_b / n;
        let current = loss(x, y, &w, b, cfg.l2);
        if current > prev + 1e-12 {
            monotone = false;
        }
        history.push(current);
        prev = current;
    }
    (LogisticModel { weights: w, bias: b, loss_history: history }, monotone)
}

/// Full-batch gradient descent from a zero start. If the loss ever rises
/// (step too long for the data's scale), the whole run is discarded and
/// retried once at half the learning rate.
pub fn fit(x: &[Vec<f64>], y: &[u8], cfg: &TrainConfig) -> Result<LogisticModel, ModelError> {
    if cfg.epochs == 0 {
        return Err(ModelError::BadConfig("logistic regression needs epochs >= 1".into()));
    }
    let (model, monotone) = run(x, y, cfg, cfg.learning_rate);
    if monotone {
        return Ok(model);
    }
    let (model, _) = run(x, y, cfg, cfg.learning_rate * 0.5);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ClassifierFamily;
    use rand::Rng;

    fn cfg() -> TrainConfig {
        TrainConfig::for_classifier(ClassifierFamily::Logistic, 0)
    }

    #[test]
    fn separates_the_two_point_problem() {
        let x = vec![vec![0.0], vec![1.0]];
        let y = vec![0u8, 1];
        let model = fit(&x, &y, &cfg()).unwrap();
        let scores = model.scores(&x).unwrap();
        assert!(scores[0] < 0.5, "score for 0 was {}", scores[0]);
        assert!(scores[1] > 0.5, "score for 1 was {}", scores[1]);
    }

    #[test]
    fn loss_history_is_monotone_on_scaled_data() {
        let mut rng = crate::models::seeded_rng(31);
        let x: Vec<Vec<f64>> =
            (0..80).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
        let y: Vec<u8> = x.iter().map(|r| u8::from(r[0] + r[1] > 1.0)).collect();
        let model = fit(&x, &y, &cfg()).unwrap();
        for pair in model.loss_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "loss rose: {} -> {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn regularization_shrinks_weights() {
        let x = vec![vec![0.0], vec![1.0], vec![0.1], vec![0.9]];
        let y = vec![0u8, 1, 0, 1];
        let mut strong = cfg();
        strong.l2 = 1.0;
        let small = fit(&x, &y, &strong).unwrap();
        let big = fit(&x, &y, &cfg()).unwrap();
        assert!(small.weights[0].abs() < big.weights[0].abs());
    }

    #[test]
    fn zero_epochs_is_a_config_error() {
        let mut bad = cfg();
        bad.epochs = 0;
        assert!(matches!(
            fit(&[vec![0.0], vec![1.0]], &[0, 1], &bad),
            Err(ModelError::BadConfig(_))
        ));
    }
}
