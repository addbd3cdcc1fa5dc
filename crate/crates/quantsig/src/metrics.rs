//! Evaluation metrics for regression and binary classification.
//!
//! Regression reports carry the coefficient of determination, explained
//! variance (both the normalized score and the raw sum of squares),
//! MAPE in percent, RMSE, and MAE. Classification reports are built from
//! the 2x2 confusion matrix; ranking quality is summarized by the ROC
//! curve and its trapezoidal AUC.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("input length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("both classes must be present")]
    SingleClass,
    #[error("labels must be 0 or 1, found {0}")]
    BadLabel(f64),
}

/// Counts of a binary classifier's outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }
}

/// Precision, recall, F1, and accuracy over a label vector.
///
/// Ratios with a zero denominator are reported as 0.0 and flagged via the
/// corresponding `*_defined` field.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub matrix: ConfusionMatrix,
    pub precision_defined: bool,
    pub recall_defined: bool,
    pub f1_defined: bool,
}

impl ClassificationReport {
    /// Metric rows in the order Precision, Recall, F1-score, Accuracy.
    pub fn table_rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("Precision", self.precision),
            ("Recall", self.recall),
            ("F1-score", self.f1),
            ("Accuracy", self.accuracy),
        ]
    }
}

/// Regression error summary.
///
/// `explained_variance_score` is the normalized form `1 - var(y - yhat)/var(y)`;
/// `ev_raw` is the plain sum `sum((yhat_i - mean(y))^2)`. Both are reported
/// because the bounded score is what comparison tables use while the raw sum
/// preserves the unnormalized definition.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionReport {
    pub r2: f64,
    pub explained_variance_score: f64,
    pub ev_raw: f64,
    /// Mean absolute percentage error, already multiplied by 100.
    pub mape_percent: f64,
    /// Number of rows excluded from MAPE because the actual value was zero.
    pub mape_excluded: usize,
    pub rmse: f64,
    pub mae: f64,
}

impl RegressionReport {
    /// Metric rows in the order R^2, Explained Variation, MAPE, RMSE, MAE.
    pub fn table_rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("R2", self.r2),
            ("Explained Variation", self.explained_variance_score),
            ("MAPE", self.mape_percent),
            ("RMSE", self.rmse),
            ("MAE", self.mae),
        ]
    }
}

/// ROC curve points from (0,0) to (1,1) plus the trapezoidal AUC.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// (false positive rate, true positive rate) pairs, both non-decreasing.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

fn check_lengths(left: usize, right: usize) -> Result<(), MetricsError> {
    if left != right {
        return Err(MetricsError::LengthMismatch { left, right });
    }
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn population_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Full regression error report for actual values `y` and predictions `yhat`.
///
/// Rows where `y_i == 0` are excluded from MAPE and counted in
/// `mape_excluded` rather than raising an error.
pub fn regression_report(y: &[f64], yhat: &[f64]) -> Result<RegressionReport, MetricsError> {
    check_lengths(y.len(), yhat.len())?;
    if y.len() < 2 {
        return Err(MetricsError::TooFewSamples { need: 2, got: y.len() });
    }
    let n = y.len() as f64;
    let y_mean = mean(y);

    let ss_res: f64 = y.iter().zip(yhat).map(|(a, p)| (a - p) * (a - p)).sum();
    let ss_tot: f64 = y.iter().map(|a| (a - y_mean) * (a - y_mean)).sum();
    if ss_tot == 0.0 {
        return Err(MetricsError::ZeroVariance("y"));
    }
    let r2 = 1.0 - ss_res / ss_tot;

    let residuals: Vec<f64> = y.iter().zip(yhat).map(|(a, p)| a - p).collect();
    let explained_variance_score = 1.0 - population_variance(&residuals) / population_variance(y);
    let ev_raw: f64 = yhat.iter().map(|p| (p - y_mean) * (p - y_mean)).sum();

    let mut mape_sum = 0.0;
    let mut mape_count = 0usize;
    for (a, p) in y.iter().zip(yhat) {
        if *a != 0.0 {
            mape_sum += ((a - p) / a).abs();
            mape_count += 1;
        }
    }
    let mape_percent = if mape_count > 0 { 100.0 * mape_sum / mape_count as f64 } else { 0.0 };

    let rmse = (ss_res / n).sqrt();
    let mae = residuals.iter().map(|r| r.abs()).sum::<f64>() / n;

    Ok(RegressionReport {
        r2,
        explained_variance_score,
        ev_raw,
        mape_percent,
        mape_excluded: y.len() - mape_count,
        rmse,
        mae,
    })
}

fn as_binary(v: f64) -> Result<bool, MetricsError> {
    if v == 0.0 {
        Ok(false)
    } else if v == 1.0 {
        Ok(true)
    } else {
        Err(MetricsError::BadLabel(v))
    }
}

/// Confusion matrix of 0/1 label vectors `y` (actual) and `yhat` (predicted).
pub fn confusion_matrix(y: &[f64], yhat: &[f64]) -> Result<ConfusionMatrix, MetricsError> {
    check_lengths(y.len(), yhat.len())?;
    let mut m = ConfusionMatrix {
        true_positives: 0,
        false_positives: 0,
        false_negatives: 0,
        true_negatives: 0,
    };
    for (a, p) in y.iter().zip(yhat) {
        match (as_binary(*a)?, as_binary(*p)?) {
            (true, true) => m.true_positives += 1,
            (false, true) => m.false_positives += 1,
            (true, false) => m.false_negatives += 1,
            (false, false) => m.true_negatives += 1,
        }
    }
    Ok(m)
}

/// Precision/recall/F1/accuracy report of 0/1 labels against predictions.
pub fn classification_report(y: &[f64], yhat: &[f64]) -> Result<ClassificationReport, MetricsError> {
    if y.is_empty() {
        return Err(MetricsError::TooFewSamples { need: 1, got: 0 });
    }
    let m = confusion_matrix(y, yhat)?;
    let (tp, fp, fn_, tn) = (
        m.true_positives as f64,
        m.false_positives as f64,
        m.false_negatives as f64,
        m.true_negatives as f64,
    );

    let precision_defined = tp + fp > 0.0;
    let precision = if precision_defined { tp / (tp + fp) } else { 0.0 };
    let recall_defined = tp + fn_ > 0.0;
    let recall = if recall_defined { tp / (tp + fn_) } else { 0.0 };
    let f1_defined = precision + recall > 0.0;
    let f1 = if f1_defined { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    let accuracy = (tp + tn) / m.total() as f64;

    Ok(ClassificationReport {
        precision,
        recall,
        f1,
        accuracy,
        matrix: m,
        precision_defined,
        recall_defined,
        f1_defined,
    })
}

/// ROC curve and AUC for 0/1 labels and real-valued scores.
///
/// Thresholds sweep over descending unique scores; tied scores collapse into
/// a single step so ties trace a diagonal segment. The AUC is the trapezoidal
/// area, which equals the probability that a random positive outranks a
/// random negative (ties counted half).
pub fn roc_auc(y: &[f64], scores: &[f64]) -> Result<RocCurve, MetricsError> {
    check_lengths(y.len(), scores.len())?;
    let mut pos = 0usize;
    let mut neg = 0usize;
    for v in y {
        if as_binary(*v)? {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }

    let mut order: Vec<usize> = (0..y.len()).collect();
    // Descending by score; index tie-break keeps the sort fully deterministic.
    order.sort_by(|&a, &b| {
        scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0usize;
    while i < order.len() {
        // Consume the whole tie group before emitting a point.
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if y[order[i]] == 1.0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }

    let mut auc = 0.0;
    for w in points.windows(2) {
        let (x1, y1) = w[0];
        let (x2, y2) = w[1];
        auc += (x2 - x1) * (y1 + y2) / 2.0;
    }

    Ok(RocCurve { points, auc })
}
