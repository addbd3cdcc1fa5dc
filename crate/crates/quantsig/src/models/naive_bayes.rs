//! Naive Bayes, Gaussian and Bernoulli flavors. Scores are posterior
//! log-odds `log P(1|x) − log P(0|x)`, so the label threshold is 0.

use super::{check_width, ModelError};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Gaussian naive Bayes: per-class feature means and variances.
#[derive(Debug, Clone, PartialEq)]
pub struct GnbModel {
    /// `priors[c]` = P(class c); sums to 1.
    pub priors: [f64; 2],
    /// `means[c][j]`, `variances[c][j]` for class c, feature j.
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

/// Floor applied to per-class variances, relative to the largest variance
/// seen anywhere (absolute 1e−9 when everything is constant). Keeps the
/// log-density finite on features that are constant within a class.
const VARIANCE_FLOOR_RATIO: f64 = 1e-9;

pub fn fit_gaussian(x: &[Vec<f64>], y: &[u8]) -> GnbModel {
    let p = x[0].len();
    let mut counts = [0usize; 2];
    let mut means = [vec![0.0; p], vec![0.0; p]];
    for (row, &label) in x.iter().zip(y) {
        counts[label as usize] += 1;
        for (m, v) in means[label as usize].iter_mut().zip(row) {
            *m += v;
        }
    }
    for c in 0..2 {
        for m in &mut means[c] {
            *m /= counts[c] as f64;
        }
    }
    let mut variances = [vec![0.0; p], vec![0.0; p]];
    for (row, &label) in x.iter().zip(y) {
        let c = label as usize;
        for j in 0..p {
            let d = row[j] - means[c][j];
            variances[c][j] += d * d;
        }
    }
    let mut max_variance = 0.0f64;
    for c in 0..2 {
        for v in &mut variances[c] {
            *v /= counts[c] as f64;
            max_variance = max_variance.max(*v);
        }
    }
    let floor = if max_variance > 0.0 { VARIANCE_FLOOR_RATIO * max_variance } else { 1e-9 };
    for c in 0..2 {
        for v in &mut variances[c] {
            *v = v.max(floor);
        }
    }
    let n = x.len() as f64;
    GnbModel {
        priors: [counts[0] as f64 / n, counts[1] as f64 / n],
        means,
        variances,
    }
}

impl GnbModel {
    fn log_likelihood(&self, class: usize, row: &[f64]) -> f64 {
        let mut acc = self.priors[class].ln();
        for (j, &v) in row.iter().enumerate() {
            let var = self.variances[class][j];
            let d = v - self.means[class][j];
            acc += -0.5 * (TWO_PI * var).ln() - d * d / (2.0 * var);
        }
        acc
    }

    /// Posterior log-odds for class 1.
    pub fn scores(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        check_width(self.means[0].len(), rows)?;
        Ok(rows.iter().map(|r| self.log_likelihood(1, r) - self.log_likelihood(0, r)).collect())
    }
}

/// Bernoulli naive Bayes over strictly binary features, Laplace-smoothed
/// with α = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BnbModel {
    pub priors: [f64; 2],
    /// `p[c][j]` = P(feature j = 1 | class c), smoothed.
    pub feature_probs: [Vec<f64>; 2],
}

pub fn fit_bernoulli(x: &[Vec<f64>], y: &[u8]) -> Result<BnbModel, ModelError> {
    for row in x {
        for &v in row {
            if v != 0.0 && v != 1.0 {
                return Err(ModelError::NonBinaryFeatures(v));
            }
        }
    }
    let p = x[0].len();
    let mut counts = [0usize; 2];
    let mut ones = [vec![0.0; p], vec![0.0; p]];
    for (row, &label) in x.iter().zip(y) {
        counts[label as usize] += 1;
        for (o, v) in ones[label as usize].iter_mut().zip(row) {
            *o += v;
        }
    }
    let mut feature_probs = [vec![0.0; p], vec![0.0; p]];
    for c in 0..2 {
        for j in 0..p {
            feature_probs[c][j] = (ones[c][j] + 1.0) / (counts[c] as f64 + 2.0);
        }
    }
    let n = x.len() as f64;
    Ok(BnbModel {
        priors: [counts[0] as f64 / n, counts[1] as f64 / n],
        feature_probs,
    })
}

impl BnbModel {
    fn log_likelihood(&self, class: usize, row: &[f64]) -> f64 {
        let mut acc = self.priors[class].ln();
        for (j, &v) in row.iter().enumerate() {
            let p1 = self.feature_probs[class][j];
            acc += if v == 1.0 { p1.ln() } else { (1.0 - p1).ln() };
        }
        acc
    }

    /// Posterior log-odds for class 1.
    pub fn scores(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        check_width(self.feature_probs[0].len(), rows)?;
        Ok(rows.iter().map(|r| self.log_likelihood(1, r) - self.log_likelihood(0, r)).collect())
    }
}
