//! Daily stock-market prediction toolkit.
//!
//! The crate covers the full pipeline from raw data to evaluated models:
//!
//! - [`marketdata`] — fetch, parse, validate, and cache daily OHLCV history.
//! - [`indicators`] — SMA, EMA, MACD, OBV, RSI, and feature-frame assembly.
//! - [`preprocess`] — min-max scaling, Pearson feature selection,
//!   chronological splits, and PCA via Jacobi rotations.
//! - [`textcorpus`] — labeled tweet loading and bag-of-words encoding.
//! - [`models`] — from-scratch regressors (linear, LSTM) and classifiers
//!   (logistic, naive Bayes, trees, forests, KNN, linear SVM, boosted
//!   trees, MLP) with a uniform train/predict/persist surface.
//! - [`metrics`] — regression and classification reports, ROC/AUC.
//!
//! Every model and metric is implemented from first principles; the only
//! external services touched are the configurable OHLCV endpoint and the
//! local cache directory.

pub mod indicators;
pub mod marketdata;
pub mod metrics;
pub mod models;
pub mod preprocess;
pub mod textcorpus;

pub use marketdata::{OhlcvBar, OhlcvSeries};
pub use preprocess::FeatureMatrix;
