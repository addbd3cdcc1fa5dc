//! From-scratch model zoo: two regressors (ordinary least squares with an
//! optional ridge term, and a univariate LSTM) plus nine binary
//! classifiers, all behind a uniform train / score / persist surface.
//!
//! Design ground rules shared by every family:
//!
//! * **Determinism.** All randomness flows from `TrainConfig::seed` through
//!   a counter-based generator; retraining with identical data and config
//!   reproduces bit-identical parameters. Forest trees derive their own
//!   streams as `seed ^ tree_index`, so per-tree work is order-independent.
//! * **Scores before labels.** Every classifier exposes a graded decision
//!   score (probability, margin, or log-odds); labels are just the score
//!   passed through the family's fixed threshold.
//! * **No hidden state.** Trained models are plain data and safe to share
//!   across threads.

mod forest;
mod gbt;
mod knn;
mod linear;
mod logistic;
mod lstm;
mod mlp;
mod naive_bayes;
mod persist;
mod svm;
mod tree;

pub use forest::ForestModel;
pub use gbt::{GbtModel, RegNode, RegTree};
pub use knn::{KnnMetric, KnnModel};
pub use linear::{fit_linear_regression, LinearModel, DEFAULT_RIDGE};
pub use lstm::{fit_lstm, LstmGradients, LstmModel};
pub use logistic::LogisticModel;
pub use mlp::{MlpGradients, MlpModel};
pub use naive_bayes::{BnbModel, GnbModel};
pub use persist::{load_model, save_model, ModelArtifact, PersistError, MODEL_MAGIC};
pub use svm::SvmModel;
pub use tree::{Node, TreeModel};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("input width {found} does not match model width {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("training data contains a single class")]
    SingleClassTraining,
    #[error("bernoulli model requires strictly binary features, found {0}")]
    NonBinaryFeatures(f64),
    #[error("series of length {len} is too short for window {window}")]
    SeriesTooShort { len: usize, window: usize },
    #[error("training loss became non-finite at epoch {epoch}")]
    DivergedLoss { epoch: usize },
    #[error("system is singular; a positive ridge term is required")]
    SingularSystem,
    #[error("bad training config: {0}")]
    BadConfig(String),
}

/// Deterministic stream used everywhere randomness is needed.
pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierFamily {
    Logistic,
    Gnb,
    Bnb,
    Dt,
    Rf,
    Knn,
    LinearSvm,
    Gbt,
    Mlp,
}

impl ClassifierFamily {
    pub const ALL: [ClassifierFamily; 9] = [
        ClassifierFamily::Logistic,
        ClassifierFamily::Gnb,
        ClassifierFamily::Bnb,
        ClassifierFamily::Dt,
        ClassifierFamily::Rf,
        ClassifierFamily::Knn,
        ClassifierFamily::LinearSvm,
        ClassifierFamily::Gbt,
        ClassifierFamily::Mlp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierFamily::Logistic => "logistic",
            ClassifierFamily::Gnb => "gnb",
            ClassifierFamily::Bnb => "bnb",
            ClassifierFamily::Dt => "dt",
            ClassifierFamily::Rf => "rf",
            ClassifierFamily::Knn => "knn",
            ClassifierFamily::LinearSvm => "svm",
            ClassifierFamily::Gbt => "gbt",
            ClassifierFamily::Mlp => "mlp",
        }
    }
}

impl std::fmt::Display for ClassifierFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Flat bag of hyperparameters; which keys matter depends on the family.
/// Build one with [`TrainConfig::for_classifier`] or
/// [`TrainConfig::for_lstm`] to get the documented defaults, then override
/// fields as needed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    /// L2 weight for logistic regression; the λ of the SVM objective.
    pub l2: f64,
    pub k: usize,
    pub metric: KnnMetric,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Tree count for the forest; boosting rounds for gradient boosting.
    pub n_trees: usize,
    pub hidden_size: usize,
    pub window_length: usize,
    /// Forest only: resample rows with replacement per tree.
    pub bootstrap: bool,
    /// Forest only: consider only √n_cols features at each split.
    pub feature_subsample: bool,
}

impl TrainConfig {
    fn base(seed: u64) -> Self {
        TrainConfig {
            seed,
            epochs: 0,
            learning_rate: 0.0,
            l2: 0.0,
            k: 5,
            metric: KnnMetric::Euclidean,
            max_depth: 10,
            min_samples_leaf: 2,
            n_trees: 100,
            hidden_size: 64,
            window_length: 30,
            bootstrap: true,
            feature_subsample: true,
        }
    }

    /// Documented defaults for one classifier family.
    pub fn for_classifier(family: ClassifierFamily, seed: u64) -> Self {
        let mut cfg = Self::base(seed);
        match family {
            ClassifierFamily::Logistic => {
                cfg.epochs = 500;
                cfg.learning_rate = 0.1;
                cfg.l2 = 1e-4;
            }
            ClassifierFamily::Gnb | ClassifierFamily::Bnb => {}
            ClassifierFamily::Dt => {}
            ClassifierFamily::Rf => {}
            ClassifierFamily::Knn => {}
            ClassifierFamily::LinearSvm => {
                cfg.epochs = 20;
                cfg.l2 = 1e-4;
            }
            ClassifierFamily::Gbt => {
                cfg.learning_rate = 0.1;
                cfg.max_depth = 3;
            }
            ClassifierFamily::Mlp => {
                cfg.epochs = 200;
                cfg.learning_rate = 1e-3;
            }
        }
        cfg
    }

    /// Documented defaults for the LSTM regressor.
    pub fn for_lstm(seed: u64) -> Self {
        let mut cfg = Self::base(seed);
        cfg.epochs = 50;
        cfg.learning_rate = 1e-3;
        cfg.hidden_size = 32;
        cfg.window_length = 30;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegressorModel {
    Linear(LinearModel),
    Lstm(LstmModel),
}

/// Batch prediction with a uniform row shape: feature rows for the linear
/// model, price windows of `window_length` closes for the LSTM (whose
/// outputs come back in price units).
pub fn predict_regressor(model: &RegressorModel, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
    match model {
        RegressorModel::Linear(m) => m.predict(rows),
        RegressorModel::Lstm(m) => rows.iter().map(|w| m.predict_next(w)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierModel {
    Logistic(LogisticModel),
    Gnb(GnbModel),
    Bnb(BnbModel),
    Dt(TreeModel),
    Rf(ForestModel),
    Knn(KnnModel),
    LinearSvm(SvmModel),
    Gbt(GbtModel),
    Mlp(MlpModel),
}

impl ClassifierModel {
    pub fn family(&self) -> ClassifierFamily {
        match self {
            ClassifierModel::Logistic(_) => ClassifierFamily::Logistic,
            ClassifierModel::Gnb(_) => ClassifierFamily::Gnb,
            ClassifierModel::Bnb(_) => ClassifierFamily::Bnb,
            ClassifierModel::Dt(_) => ClassifierFamily::Dt,
            ClassifierModel::Rf(_) => ClassifierFamily::Rf,
            ClassifierModel::Knn(_) => ClassifierFamily::Knn,
            ClassifierModel::LinearSvm(_) => ClassifierFamily::LinearSvm,
            ClassifierModel::Gbt(_) => ClassifierFamily::Gbt,
            ClassifierModel::Mlp(_) => ClassifierFamily::Mlp,
        }
    }

    /// Label decision threshold: 0.5 where scores are probability-like,
    /// 0 where they are margins or log-odds.
    pub fn threshold(&self) -> f64 {
        match self {
            ClassifierModel::Logistic(_)
            | ClassifierModel::Dt(_)
            | ClassifierModel::Rf(_)
            | ClassifierModel::Knn(_)
            | ClassifierModel::Mlp(_) => 0.5,
            ClassifierModel::Gnb(_)
            | ClassifierModel::Bnb(_)
            | ClassifierModel::LinearSvm(_)
            | ClassifierModel::Gbt(_) => 0.0,
        }
    }
}

fn check_training_inputs(x: &[Vec<f64>], y: &[u8]) -> Result<usize, ModelError> {
    assert!(!x.is_empty(), "training set is empty");
    assert_eq!(x.len(), y.len(), "feature/label length mismatch");
    let width = x[0].len();
    assert!(width >= 1, "training rows have no features");
    for row in x {
        if row.len() != width {
            return Err(ModelError::ShapeMismatch { expected: width, found: row.len() });
        }
    }
    if y.iter().all(|&l| l == 0) || y.iter().all(|&l| l == 1) {
        return Err(ModelError::SingleClassTraining);
    }
    Ok(width)
}

/// Train one classifier family. `y` must hold both classes; the Bernoulli
/// family additionally requires every feature value to be exactly 0 or 1.
pub fn fit_classifier(
    x: &[Vec<f64>],
    y: &[u8],
    family: ClassifierFamily,
    cfg: &TrainConfig,
) -> Result<ClassifierModel, ModelError> {
    check_training_inputs(x, y)?;
    Ok(match family {
        ClassifierFamily::Logistic => ClassifierModel::Logistic(logistic::fit(x, y, cfg)?),
        ClassifierFamily::Gnb => ClassifierModel::Gnb(naive_bayes::fit_gaussian(x, y)),
        ClassifierFamily::Bnb => ClassifierModel::Bnb(naive_bayes::fit_bernoulli(x, y)?),
        ClassifierFamily::Dt => ClassifierModel::Dt(tree::fit(x, y, cfg)),
        ClassifierFamily::Rf => ClassifierModel::Rf(forest::fit(x, y, cfg)),
        ClassifierFamily::Knn => ClassifierModel::Knn(knn::fit(x, y, cfg)?),
        ClassifierFamily::LinearSvm => ClassifierModel::LinearSvm(svm::fit(x, y, cfg)),
        ClassifierFamily::Gbt => ClassifierModel::Gbt(gbt::fit(x, y, cfg)),
        ClassifierFamily::Mlp => ClassifierModel::Mlp(mlp::fit(x, y, cfg)?),
    })
}

/// Graded class-1 confidence for each row. Monotone in confidence within a
/// family, but *not* comparable across families (probabilities vs margins).
pub fn decision_scores(model: &ClassifierModel, x: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
    match model {
        ClassifierModel::Logistic(m) => m.scores(x),
        ClassifierModel::Gnb(m) => m.scores(x),
        ClassifierModel::Bnb(m) => m.scores(x),
        ClassifierModel::Dt(m) => m.scores(x),
        ClassifierModel::Rf(m) => m.scores(x),
        ClassifierModel::Knn(m) => m.scores(x),
        ClassifierModel::LinearSvm(m) => m.scores(x),
        ClassifierModel::Gbt(m) => m.scores(x),
        ClassifierModel::Mlp(m) => m.scores(x),
    }
}

/// Hard labels: `decision_scores` thresholded at the family threshold.
pub fn predict_labels(model: &ClassifierModel, x: &[Vec<f64>]) -> Result<Vec<u8>, ModelError> {
    let threshold = model.threshold();
    Ok(decision_scores(model, x)?
        .into_iter()
        .map(|s| if s >= threshold { 1 } else { 0 })
        .collect())
}

pub(crate) fn check_width(expected: usize, rows: &[Vec<f64>]) -> Result<(), ModelError> {
    for row in rows {
        if row.len() != expected {
            return Err(ModelError::ShapeMismatch { expected, found: row.len() });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Two well-separated Gaussian blobs; linearly separable.
    pub(crate) fn two_blobs(n_per_class: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut rng = seeded_rng(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..n_per_class {
            x.push(vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]);
            y.push(0u8);
        }
        for _ in 0..n_per_class {
            x.push(vec![10.0 + rng.gen_range(-1.0..1.0), 10.0 + rng.gen_range(-1.0..1.0)]);
            y.push(1u8);
        }
        (x, y)
    }

    fn accuracy(pred: &[u8], y: &[u8]) -> f64 {
        pred.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
    }

    #[test]
    fn every_family_learns_separable_blobs() {
        let (x, y) = two_blobs(40, 11);
        for family in ClassifierFamily::ALL {
            let cfg = TrainConfig::for_classifier(family, 7);
            let model = if family == ClassifierFamily::Bnb {
                // Bernoulli needs binary features; threshold the blobs.
                let xb: Vec<Vec<f64>> = x
                    .iter()
                    .map(|r| r.iter().map(|&v| if v > 5.0 { 1.0 } else { 0.0 }).collect())
                    .collect();
                let m = fit_classifier(&xb, &y, family, &cfg).unwrap();
                let pred = predict_labels(&m, &xb).unwrap();
                assert!(accuracy(&pred, &y) > 0.95, "{family} failed on binary blobs");
                continue;
            } else {
                fit_classifier(&x, &y, family, &cfg).unwrap()
            };
            let pred = predict_labels(&model, &x).unwrap();
            assert!(accuracy(&pred, &y) > 0.95, "{family} under-fit separable blobs");
            assert_eq!(model.family(), family);
        }
    }

    #[test]
    fn labels_agree_with_thresholded_scores_everywhere() {
        let (x, y) = two_blobs(30, 3);
        let mut rng = seeded_rng(42);
        let probes: Vec<Vec<f64>> = (0..500)
            .map(|_| vec![rng.gen_range(-5.0..15.0), rng.gen_range(-5.0..15.0)])
            .collect();
        for family in ClassifierFamily::ALL {
            if family == ClassifierFamily::Bnb {
                continue; // probed below with binary data
            }
            let cfg = TrainConfig::for_classifier(family, 1);
            let model = fit_classifier(&x, &y, family, &cfg).unwrap();
            let scores = decision_scores(&model, &probes).unwrap();
            let labels = predict_labels(&model, &probes).unwrap();
            for (s, l) in scores.iter().zip(&labels) {
                assert_eq!(*l, u8::from(*s >= model.threshold()));
            }
        }
        let xb: Vec<Vec<f64>> = x
            .iter()
            .map(|r| r.iter().map(|&v| if v > 5.0 { 1.0 } else { 0.0 }).collect())
            .collect();
        let probes_b: Vec<Vec<f64>> = (0..500)
            .map(|_| vec![f64::from(rng.gen_bool(0.5)), f64::from(rng.gen_bool(0.5))])
            .collect();
        let cfg = TrainConfig::for_classifier(ClassifierFamily::Bnb, 1);
        let model = fit_classifier(&xb, &y, ClassifierFamily::Bnb, &cfg).unwrap();
        let scores = decision_scores(&model, &probes_b).unwrap();
        let labels = predict_labels(&model, &probes_b).unwrap();
        for (s, l) in scores.iter().zip(&labels) {
            assert_eq!(*l, u8::from(*s >= 0.0));
        }
    }

    #[test]
    fn single_class_training_is_rejected_for_all_families() {
        let x = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let y = vec![1u8, 1, 1];
        for family in ClassifierFamily::ALL {
            let cfg = TrainConfig::for_classifier(family, 0);
            assert!(
                matches!(fit_classifier(&x, &y, family, &cfg), Err(ModelError::SingleClassTraining)),
                "{family} accepted single-class data"
            );
        }
    }

    #[test]
    fn retraining_is_bit_identical_for_every_family() {
        let (x, y) = two_blobs(25, 9);
        let xb: Vec<Vec<f64>> = x
            .iter()
            .map(|r| r.iter().map(|&v| if v > 5.0 { 1.0 } else { 0.0 }).collect())
            .collect();
        for family in ClassifierFamily::ALL {
            let cfg = TrainConfig::for_classifier(family, 123);
            let data = if family == ClassifierFamily::Bnb { &xb } else { &x };
            let first = fit_classifier(data, &y, family, &cfg).unwrap();
            let second = fit_classifier(data, &y, family, &cfg).unwrap();
            assert_eq!(first, second, "{family} retrain differed");
        }
    }

    #[test]
    fn ragged_training_rows_are_shape_mismatch() {
        let x = vec![vec![1.0, 2.0], vec![3.0]];
        let y = vec![0u8, 1];
        let cfg = TrainConfig::for_classifier(ClassifierFamily::Knn, 0);
        assert!(matches!(
            fit_classifier(&x, &y, ClassifierFamily::Knn, &cfg),
            Err(ModelError::ShapeMismatch { .. })
        ));
    }
}
