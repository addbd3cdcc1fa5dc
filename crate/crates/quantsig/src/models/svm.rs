//! Linear support-vector machine trained with the Pegasos subgradient
//! method.
//!
//! Labels are remapped to ±1 internally. The step size decays as 1/(λt)
//! with a global step counter, visiting rows in a freshly shuffled order
//! each epoch. The bias is updated on margin violations but never shrunk
//! by the regulariser. `objective_history` records the primal objective
//! (mean hinge loss plus λ/2·‖w‖²) after every epoch.

use rand::seq::SliceRandom;

use super::{check_width, ModelError, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub objective_history: Vec<f64>,
}

impl SvmModel {
    /// Signed margin w·x + b; positive means the positive class.
    pub fn scores(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        check_width(self.weights.len(), rows)?;
        Ok(rows.iter().map(|r| self.margin(r)).collect())
    }

    fn margin(&self, row: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>()
    }

    fn objective(&self, x: &[Vec<f64>], signed: &[f64], lambda: f64) -> f64 {
        let hinge: f64 = x
            .iter()
            .zip(signed)
            .map(|(row, s)| (1.0 - s * self.margin(row)).max(0.0))
            .sum::<f64>()
            / x.len() as f64;
        let norm2: f64 = self.weights.iter().map(|w| w * w).sum();
        hinge + 0.5 * lambda * norm2
    }
}

pub fn fit(x: &[Vec<f64>], y: &[u8], cfg: &TrainConfig) -> SvmModel {
    let n_features = x[0].len();
    let lambda = cfg.l2.max(1e-12);
    let signed: Vec<f64> = y.iter().map(|&v| if v == 1 { 1.0 } else { -1.0 }).collect();

    let mut model =
        SvmModel { weights: vec![0.0; n_features], bias: 0.0, objective_history: Vec::new() };
    let mut rng = super::seeded_rng(cfg.seed);
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut t: u64 = 0;

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let margin = signed[i] * model.margin(&x[i]);
            let shrink = 1.0 - eta * lambda;
            for w in &mut model.weights {
                *w *= shrink;
            }
            if margin < 1.0 {
                for (w, v) in model.weights.iter_mut().zip(&x[i]) {
                    *w += eta * signed[i] * v;
                }
                model.bias += eta * signed[i];
            }
        }
        model.objective_history.push(model.objective(x, &signed, lambda));
    }
    model
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ClassifierFamily;

    fn cfg(seed: u64) -> TrainConfig {
        TrainConfig::for_classifier(ClassifierFamily::LinearSvm, seed)
    }

    #[test]
    fn separates_two_blobs() {
        let (x, y) = crate::models::tests::two_blobs(50, 13);
        let model = fit(&x, &y, &cfg(0));
        let scores = model.scores(&x).unwrap();
        let correct = scores
            .iter()
            .zip(&y)
            .filter(|(s, &label)| (**s >= 0.0) == (label == 1))
            .count();
        assert_eq!(correct, x.len(), "separable data must be classified perfectly");
    }

    #[test]
    fn final_objective_beats_first_epoch() {
        let (x, y) = crate::models::tests::two_blobs(60, 4);
        let model = fit(&x, &y, &cfg(1));
        let first = model.objective_history[0];
        let last = *model.objective_history.last().unwrap();
        assert!(
            last < first,
            "objective should improve over training: first={first} last={last}"
        );
    }

    #[test]
    fn history_length_matches_epochs() {
        let (x, y) = crate::models::tests::two_blobs(10, 2);
        let mut c = cfg(0);
        c.epochs = 7;
        let model = fit(&x, &y, &c);
        assert_eq!(model.objective_history.len(), 7);
    }

    #[test]
    fn margins_scale_with_distance_from_boundary() {
        let x = vec![vec![-4.0], vec![-1.0], vec![1.0], vec![4.0]];
        let y = vec![0u8, 0, 1, 1];
        let model = fit(&x, &y, &cfg(0));
        let s = model.scores(&x).unwrap();
        assert!(s[0] < s[1] && s[1] < s[2] && s[2] < s[3], "{s:?}");
        assert!(s[0] < 0.0 && s[3] > 0.0);
    }

    #[test]
    fn bias_survives_all_positive_features() {
        // classes split at x = 2 with every feature positive: a zero-bias
        // separator scores sign(w·x) identically on all rows, so anything
        // above 50% accuracy requires a learned intercept
        let x: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                vec![if i < 20 { 0.5 + 0.05 * i as f64 } else { 2.5 + 0.05 * (i - 20) as f64 }]
            })
            .collect();
        let y: Vec<u8> = (0..40).map(|i| u8::from(i >= 20)).collect();
        let mut c = cfg(0);
        c.epochs = 200;
        let model = fit(&x, &y, &c);
        let scores = model.scores(&x).unwrap();
        let correct = scores
            .iter()
            .zip(&y)
            .filter(|(s, &label)| (**s >= 0.0) == (label == 1))
            .count();
        assert!(correct >= 38, "only {correct}/40 correct — bias not learned");
    }

    #[test]
    fn retraining_with_same_seed_is_identical() {
        let (x, y) = crate::models::tests::two_blobs(30, 21);
        assert_eq!(fit(&x, &y, &cfg(9)), fit(&x, &y, &cfg(9)));
        assert_ne!(fit(&x, &y, &cfg(9)), fit(&x, &y, &cfg(10)));
    }
}
