//! Random forest: bagged classification trees with per-split feature
//! subsampling.
//!
//! Each tree draws its own RNG seeded with `cfg.seed ^ tree_index`, so the
//! whole ensemble is reproducible and individual trees can be rebuilt in
//! isolation. Scores are the mean of the per-tree leaf fractions.

use rand::Rng;

use super::tree::{GrowContext, TreeModel};
use super::{check_width, ModelError, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<TreeModel>,
    pub tree_seeds: Vec<u64>,
}

impl ForestModel {
    pub fn scores(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        check_width(self.trees[0].n_features, rows)?;
        Ok(rows
            .iter()
            .map(|r| {
                let sum: f64 = self.trees.iter().map(|t| t.score_one(r)).sum();
                sum / self.trees.len() as f64
            })
            .collect())
    }
}

pub fn fit(x: &[Vec<f64>], y: &[u8], cfg: &TrainConfig) -> ForestModel {
    let n = x.len();
    let n_features = x[0].len();
    let features_per_split = if cfg.feature_subsample {
        ((n_features as f64).sqrt().floor() as usize).max(1)
    } else {
        n_features
    };

    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut tree_seeds = Vec::with_capacity(cfg.n_trees);
    for t in 0..cfg.n_trees {
        let seed = cfg.seed ^ t as u64;
        let mut rng = super::seeded_rng(seed);
        let indices: Vec<usize> = if cfg.bootstrap {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let mut ctx = GrowContext {
            x,
            y,
            max_depth: cfg.max_depth,
            min_samples_leaf: cfg.min_samples_leaf,
            features_per_split,
            rng,
        };
        trees.push(ctx.grow(&indices));
        tree_seeds.push(seed);
    }
    ForestModel { trees, tree_seeds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{tree, ClassifierFamily};

    fn cfg(seed: u64) -> TrainConfig {
        TrainConfig::for_classifier(ClassifierFamily::Rf, seed)
    }

    fn blobs() -> (Vec<Vec<f64>>, Vec<u8>) {
        crate::models::tests::two_blobs(40, 7)
    }

    #[test]
    fn single_tree_without_randomness_equals_plain_tree() {
        let (x, y) = blobs();
        let mut plain = cfg(3);
        plain.n_trees = 1;
        plain.bootstrap = false;
        plain.feature_subsample = false;
        let forest = fit(&x, &y, &plain);
        let lone = tree::fit(&x, &y, &TrainConfig::for_classifier(ClassifierFamily::Dt, 3));
        assert_eq!(forest.trees[0], lone);
        assert_eq!(forest.scores(&x).unwrap(), lone.scores(&x).unwrap());
    }

    #[test]
    fn bootstrap_trees_differ_from_each_other() {
        let (x, y) = blobs();
        let forest = fit(&x, &y, &cfg(11));
        assert_eq!(forest.trees.len(), 100);
        let distinct = forest.trees.iter().any(|t| *t != forest.trees[0]);
        assert!(distinct, "all bootstrap trees identical — sampling is broken");
    }

    #[test]
    fn seeds_follow_the_xor_schedule() {
        let (x, y) = blobs();
        let mut small = cfg(40);
        small.n_trees = 4;
        let forest = fit(&x, &y, &small);
        assert_eq!(forest.tree_seeds, vec![40 ^ 0, 40 ^ 1, 40 ^ 2, 40 ^ 3]);
    }

    #[test]
    fn ensemble_scores_are_tree_means() {
        let (x, y) = blobs();
        let mut small = cfg(5);
        small.n_trees = 7;
        let forest = fit(&x, &y, &small);
        let probe = vec![vec![4.0, 6.0], vec![0.5, 0.5]];
        let expected: Vec<f64> = probe
            .iter()
            .map(|r| {
                forest.trees.iter().map(|t| t.score_one(r)).sum::<f64>() / forest.trees.len() as f64
            })
            .collect();
        assert_eq!(forest.scores(&probe).unwrap(), expected);
    }

    #[test]
    fn different_seeds_give_different_forests() {
        let (x, y) = blobs();
        let a = fit(&x, &y, &cfg(1));
        let b = fit(&x, &y, &cfg(2));
        assert_ne!(a, b);
    }
}
