//! CART-style binary classification tree with Gini impurity and exhaustive
//! midpoint threshold search.
//!
//! Ties between candidate splits are broken by enumeration order — lowest
//! feature index, then lowest threshold — which, together with the absence
//! of any sampling in the plain tree, makes training fully deterministic.

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

use super::{check_width, ModelError, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { counts: [usize; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    pub n_features: usize,
    /// Root at index 0; children always at higher indices (no cycles).
    pub nodes: Vec<Node>,
}

impl TreeModel {
    /// Class-1 fraction of the leaf each row lands in.
    pub fn scores(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        check_width(self.n_features, rows)?;
        Ok(rows.iter().map(|r| self.score_one(r)).collect())
    }

    pub(crate) fn score_one(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf { counts } => {
                    return counts[1] as f64 / (counts[0] + counts[1]) as f64;
                }
            }
        }
    }

    /// Structural sanity: single root, children in range and acyclic
    /// (guaranteed by construction since children follow parents; checked
    /// explicitly when loading from disk).
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.nodes.is_empty() {
            return Err(ModelError::BadConfig("tree has no nodes".into()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Split { feature, left, right, .. } = node {
                if *feature >= self.n_features {
                    return Err(ModelError::BadConfig(format!("node {i} splits on feature {feature}")));
                }
                if *left <= i || *right <= i || *left >= self.nodes.len() || *right >= self.nodes.len()
                {
                    return Err(ModelError::BadConfig(format!("node {i} has bad children")));
                }
            } else if let Node::Leaf { counts } = node {
                if counts[0] + counts[1] == 0 {
                    return Err(ModelError::BadConfig(format!("node {i} is an empty leaf")));
                }
            }
        }
        Ok(())
    }
}

pub(crate) struct GrowContext<'a> {
    pub x: &'a [Vec<f64>],
    pub y: &'a [u8],
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features examined per split; the full width disables sampling.
    pub features_per_split: usize,
    pub rng: ChaCha8Rng,
}

fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - p0 * p0 - p1 * p1
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    weighted_impurity: f64,
}

impl<'a> GrowContext<'a> {
    pub(crate) fn grow(&mut self, indices: &[usize]) -> TreeModel {
        let mut nodes = Vec::new();
        self.build(indices, 0, &mut nodes);
        TreeModel { n_features: self.x[0].len(), nodes }
    }

    fn build(&mut self, indices: &[usize], depth: usize, nodes: &mut Vec<Node>) -> usize {
        let mut counts = [0usize; 2];
        for &i in indices {
            counts[self.y[i] as usize] += 1;
        }
        let make_leaf = counts[0] == 0
            || counts[1] == 0
            || depth >= self.max_depth
            || indices.len() < 2 * self.min_samples_leaf;
        let split = if make_leaf { None } else { self.best_split(indices) };
        let Some(split) = split else {
            nodes.push(Node::Leaf { counts });
            return nodes.len() - 1;
        };

        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            indices.iter().partition(|&&i| self.x[i][split.feature] <= split.threshold);
        let at = nodes.len();
        nodes.push(Node::Leaf { counts }); // placeholder, patched below
        let left = self.build(&left_idx, depth + 1, nodes);
        let right = self.build(&right_idx, depth + 1, nodes);
        nodes[at] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        at
    }

    /// Exhaustively scan candidate features; thresholds are midpoints of
    /// consecutive distinct values. Strictly-better acceptance keeps the
    /// first candidate on ties, i.e. lowest feature then lowest threshold.
    fn best_split(&mut self, indices: &[usize]) -> Option<BestSplit> {
        let n_features = self.x[0].len();
        let candidate_features: Vec<usize> = if self.features_per_split >= n_features {
            (0..n_features).collect()
        } else {
            let mut picked: Vec<usize> =
                sample(&mut self.rng, n_features, self.features_per_split).into_vec();
            picked.sort_unstable();
            picked
        };

        let total = indices.len();
        let mut total_counts = [0usize; 2];
        for &i in indices {
            total_counts[self.y[i] as usize] += 1;
        }

        let mut best: Option<BestSplit> = None;
        let mut sorted: Vec<(f64, u8)> = Vec::with_capacity(total);
        for feature in candidate_features {
            sorted.clear();
            sorted.extend(indices.iter().map(|&i| (self.x[i][feature], self.y[i])));
            sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

            let mut left_counts = [0usize; 2];
            for pos in 0..total - 1 {
                left_counts[sorted[pos].1 as usize] += 1;
                if sorted[pos].0 == sorted[pos + 1].0 {
                    continue; // not a boundary between distinct values
                }
                let left_n = pos + 1;
                let right_n = total - left_n;
                if left_n < self.min_samples_leaf || right_n < self.min_samples_leaf {
                    continue;
                }
                let right_counts =
                    [total_counts[0] - left_counts[0], total_counts[1] - left_counts[1]];
                let weighted = (left_n as f64 * gini(left_counts)
                    + right_n as f64 * gini(right_counts))
                    / total as f64;
                if best.as_ref().is_none_or(|b| weighted < b.weighted_impurity) {
                    best = Some(BestSplit {
                        feature,
                        threshold: 0.5 * (sorted[pos].0 + sorted[pos + 1].0),
                        weighted_impurity: weighted,
                    });
                }
            }
        }
        best
    }
}

pub fn fit(x: &[Vec<f64>], y: &[u8], cfg: &TrainConfig) -> TreeModel {
    let indices: Vec<usize> = (0..x.len()).collect();
    let mut ctx = GrowContext {
        x,
        y,
        max_depth: cfg.max_depth,
        min_samples_leaf: cfg.min_samples_leaf,
        features_per_split: x[0].len(),
        rng: super::seeded_rng(cfg.seed),
    };
    let model = ctx.grow(&indices);
    debug_assert!(model.validate().is_ok());
    model
}
