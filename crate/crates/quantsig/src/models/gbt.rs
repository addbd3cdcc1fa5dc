//! Gradient-boosted trees for binary classification with logistic loss.
//!
//! Boosting starts from the prior log-odds and adds shallow regression
//! trees fit to the residuals y − σ(F). Leaf values use a single Newton
//! step Σr / Σp(1−p), so one round with a unit learning rate reproduces
//! the classic initial-score-plus-first-tree decomposition exactly.

use super::{check_width, sigmoid, ModelError, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum RegNode {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegTree {
    pub nodes: Vec<RegNode>,
}

impl RegTree {
    pub(crate) fn predict_one(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                RegNode::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
                RegNode::Leaf { value } => return *value,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbtModel {
    pub n_features: usize,
    pub initial_log_odds: f64,
    pub learning_rate: f64,
    pub trees: Vec<RegTree>,
}

impl GbtModel {
    /// Accumulated log-odds F(x); positive favours the positive class.
    pub fn scores(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        check_width(self.n_features, rows)?;
        Ok(rows.iter().map(|r| self.score_one(r)).collect())
    }

    fn score_one(&self, row: &[f64]) -> f64 {
        self.initial_log_odds
            + self.learning_rate * self.trees.iter().map(|t| t.predict_one(row)).sum::<f64>()
    }
}

struct ResidualTreeBuilder<'a> {
    x: &'a [Vec<f64>],
    /// Residuals y − p, the negative gradient of the logistic loss.
    residuals: &'a [f64],
    /// Hessian weights p(1−p) for the Newton leaf step.
    hessians: &'a [f64],
    max_depth: usize,
    min_samples_leaf: usize,
}

impl<'a> ResidualTreeBuilder<'a> {
    fn leaf_value(&self, indices: &[usize]) -> f64 {
        let grad: f64 = indices.iter().map(|&i| self.residuals[i]).sum();
        let hess: f64 = indices.iter().map(|&i| self.hessians[i]).sum();
        if hess < 1e-12 {
            0.0
        } else {
            grad / hess
        }
    }

    fn build(&self, indices: &[usize], depth: usize, nodes: &mut Vec<RegNode>) -> usize {
        let split = if depth >= self.max_depth || indices.len() < 2 * self.min_samples_leaf {
            None
        } else {
            self.best_split(indices)
        };
        let Some((feature, threshold)) = split else {
            nodes.push(RegNode::Leaf { value: self.leaf_value(indices) });
            return nodes.len() - 1;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            indices.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let at = nodes.len();
        nodes.push(RegNode::Leaf { value: 0.0 }); // placeholder
        let left = self.build(&left_idx, depth + 1, nodes);
        let right = self.build(&right_idx, depth + 1, nodes);
        nodes[at] = RegNode::Split { feature, threshold, left, right };
        at
    }

    /// Minimise the summed squared error of the residuals around each
    /// side's mean; midpoint thresholds, first-wins tie-breaking as in the
    /// classification tree.
    fn best_split(&self, indices: &[usize]) -> Option<(usize, f64)> {
        let total = indices.len();
        let total_sum: f64 = indices.iter().map(|&i| self.residuals[i]).sum();
        let total_sq: f64 = indices.iter().map(|&i| self.residuals[i] * self.residuals[i]).sum();
        let parent_sse = total_sq - total_sum * total_sum / total as f64;

        let mut best: Option<(usize, f64, f64)> = None;
        let mut sorted: Vec<(f64, f64)> = Vec::with_capacity(total);
        for feature in 0..self.x[0].len() {
            sorted.clear();
            sorted.extend(indices.iter().map(|&i| (self.x[i][feature], self.residuals[i])));
            sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

            let mut left_sum = 0.0;
            let mut left_sq = 0.0;
            for pos in 0..total - 1 {
                left_sum += sorted[pos].1;
                left_sq += sorted[pos].1 * sorted[pos].1;
                if sorted[pos].0 == sorted[pos + 1].0 {
                    continue;
                }
                let left_n = pos + 1;
                let right_n = total - left_n;
                if left_n < self.min_samples_leaf || right_n < self.min_samples_leaf {
                    continue;
                }
                let right_sum = total_sum - left_sum;
                let right_sq = total_sq - left_sq;
                let sse = (left_sq - left_sum * left_sum / left_n as f64)
                    + (right_sq - right_sum * right_sum / right_n as f64);
                if sse < parent_sse - 1e-12
                    && best.map_or(true, |(_, _, b)| sse < b)
                {
                    best = Some((feature, 0.5 * (sorted[pos].0 + sorted[pos + 1].0), sse));
                }
            }
        }
        best.map(|(f, t, _)| (f, t))
    }
}

pub fn fit(x: &[Vec<f64>], y: &[u8], cfg: &TrainConfig) -> GbtModel {
    let n = x.len();
    let p_mean = (y.iter().map(|&v| f64::from(v)).sum::<f64>() / n as f64)
        .clamp(1e-12, 1.0 - 1e-12);
    let initial_log_odds = (p_mean / (1.0 - p_mean)).ln();

    let mut scores = vec![initial_log_odds; n];
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let all: Vec<usize> = (0..n).collect();
    for _ in 0..cfg.n_trees {
        let probs: Vec<f64> = scores.iter().map(|&s| sigmoid(s)).collect();
        let residuals: Vec<f64> =
            y.iter().zip(&probs).map(|(&label, &p)| f64::from(label) - p).collect();
        let hessians: Vec<f64> = probs.iter().map(|&p| p * (1.0 - p)).collect();

        let builder = ResidualTreeBuilder {
            x,
            residuals: &residuals,
            hessians: &hessians,
            max_depth: cfg.max_depth,
            min_samples_leaf: cfg.min_samples_leaf,
        };
        let mut nodes = Vec::new();
        builder.build(&all, 0, &mut nodes);
        let tree = RegTree { nodes };
        for (s, row) in scores.iter_mut().zip(x) {
            *s += cfg.learning_rate * tree.predict_one(row);
        }
        trees.push(tree);
    }
    GbtModel { n_features: x[0].len(), initial_log_odds, learning_rate: cfg.learning_rate, trees }
}
