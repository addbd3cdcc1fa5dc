//! k-nearest-neighbour classifier over stored training rows.
//!
//! Neighbours are ordered by (distance, training-row index) so equidistant
//! points resolve the same way on every run. `k` larger than the training
//! set degrades gracefully to using every stored row.

use super::{check_width, ModelError, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnnMetric {
    Euclidean,
    Manhattan,
}

impl KnnMetric {
    fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            KnnMetric::Euclidean => {
                a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
            }
            KnnMetric::Manhattan => a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<u8>,
    pub k: usize,
    pub metric: KnnMetric,
}

impl KnnModel {
    /// Fraction of positive labels among the k nearest stored rows.
    pub fn scores(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        check_width(self.x[0].len(), rows)?;
        let k = self.k.min(self.x.len());
        Ok(rows
            .iter()
            .map(|r| {
                let mut dists: Vec<(f64, usize)> = self
                    .x
                    .iter()
                    .enumerate()
                    .map(|(i, t)| (self.metric.distance(r, t), i))
                    .collect();
                dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                let positives =
                    dists[..k].iter().filter(|(_, i)| self.y[*i] == 1).count();
                positives as f64 / k as f64
            })
            .collect())
    }
}

pub fn fit(x: &[Vec<f64>], y: &[u8], cfg: &TrainConfig) -> Result<KnnModel, ModelError> {
    if cfg.k == 0 {
        return Err(ModelError::BadConfig("k must be at least 1".into()));
    }
    Ok(KnnModel { x: x.to_vec(), y: y.to_vec(), k: cfg.k, metric: cfg.metric })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ClassifierFamily;
    use rand::Rng;
    use rand::SeedableRng;

    fn cfg(k: usize) -> TrainConfig {
        let mut c = TrainConfig::for_classifier(ClassifierFamily::Knn, 0);
        c.k = k;
        c
    }

    #[test]
    fn one_neighbour_reproduces_training_labels() {
        let x = vec![vec![0.0, 0.0], vec![3.0, 1.0], vec![-2.0, 4.0], vec![7.0, 7.0]];
        let y = vec![0u8, 1, 0, 1];
        let model = fit(&x, &y, &cfg(1)).unwrap();
        let scores = model.scores(&x).unwrap();
        assert_eq!(scores, vec![0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn vote_fraction_counts_positive_neighbours() {
        // five training points on a line; probe at 0 sees [0,1,2,3,4] ranked
        let x: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let y = vec![1u8, 0, 1, 1, 0];
        let model = fit(&x, &y, &cfg(5)).unwrap();
        let s = model.scores(&[vec![0.0]]).unwrap();
        assert!((s[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn distance_ties_break_toward_lower_row_index() {
        // rows 0 and 1 are equidistant from the probe but carry opposite labels
        let x = vec![vec![-1.0], vec![1.0], vec![50.0]];
        let y = vec![1u8, 0, 0];
        let model = fit(&x, &y, &cfg(1)).unwrap();
        assert_eq!(model.scores(&[vec![0.0]]).unwrap(), vec![1.0]);

        let flipped = KnnModel { y: vec![0, 1, 0], ..model };
        assert_eq!(flipped.scores(&[vec![0.0]]).unwrap(), vec![0.0]);
    }

    #[test]
    fn k_larger_than_training_set_uses_all_rows() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0]];
        let y = vec![1u8, 1, 0];
        let model = fit(&x, &y, &cfg(25)).unwrap();
        let s = model.scores(&[vec![9.0]]).unwrap();
        assert!((s[0] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn manhattan_and_euclidean_can_disagree() {
        // probe at origin: (2,2) is Euclidean-closer (√8 < 3) but
        // Manhattan-farther (4 > 3) than (3,0), and the labels differ
        let x = vec![vec![2.0, 2.0], vec![3.0, 0.0]];
        let y = vec![1u8, 0];
        let mut a = cfg(1);
        a.metric = KnnMetric::Euclidean;
        let mut b = cfg(1);
        b.metric = KnnMetric::Manhattan;
        let ea = fit(&x, &y, &a).unwrap().scores(&[vec![0.0, 0.0]]).unwrap();
        let eb = fit(&x, &y, &b).unwrap().scores(&[vec![0.0, 0.0]]).unwrap();
        assert_eq!(ea, vec![1.0]);
        assert_eq!(eb, vec![0.0]);
    }

    #[test]
    fn matches_brute_force_oracle_on_random_data() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let x: Vec<Vec<f64>> =
            (0..50).map(|_| (0..4).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect();
        let y: Vec<u8> = (0..50).map(|_| rng.gen_range(0..2) as u8).collect();
        let probes: Vec<Vec<f64>> =
            (0..20).map(|_| (0..4).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect();

        for k in [1usize, 3, 7] {
            let model = fit(&x, &y, &cfg(k)).unwrap();
            let got = model.scores(&probes).unwrap();
            for (p, s) in probes.iter().zip(&got) {
                // oracle: full sort of (distance, index), count positives in top k
                let mut order: Vec<usize> = (0..x.len()).collect();
                order.sort_by(|&a, &b| {
                    let da: f64 = x[a].iter().zip(p).map(|(u, v)| (u - v) * (u - v)).sum();
                    let db: f64 = x[b].iter().zip(p).map(|(u, v)| (u - v) * (u - v)).sum();
                    da.partial_cmp(&db).unwrap().then(a.cmp(&b))
                });
                let expect =
                    order[..k].iter().filter(|&&i| y[i] == 1).count() as f64 / k as f64;
                assert!((s - expect).abs() < 1e-12, "k={k} probe={p:?}");
            }
        }
    }

    #[test]
    fn zero_k_is_rejected() {
        let x = vec![vec![0.0]];
        let y = vec![0u8];
        assert!(matches!(fit(&x, &y, &cfg(0)), Err(ModelError::BadConfig(_))));
    }
}
