//! Least-squares linear regression via Householder QR, with an optional
//! ridge term for numerical insurance.
//!
//! The intercept is the last column of the augmented system and is never
//! regularized; the ridge rows `√λ·I` touch only the feature weights. With
//! the default λ = 1e−8 the solution is indistinguishable from OLS on any
//! sanely scaled data while staying solvable on collinear features.

use super::{check_width, ModelError};

pub const DEFAULT_RIDGE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub feature_names: Vec<String>,
}

impl LinearModel {
    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        check_width(self.weights.len(), rows)?;
        Ok(rows
            .iter()
            .map(|row| self.intercept + row.iter().zip(&self.weights).map(|(x, w)| x * w).sum::<f64>())
            .collect())
    }
}

/// Minimize `‖Xw + b·1 − y‖² + λ‖w‖²` by QR-factorizing the augmented
/// system `[X 1; √λ·I 0]`. `SingularSystem` is only reachable at λ = 0.
pub fn fit_linear_regression(
    x: &[Vec<f64>],
    y: &[f64],
    ridge: f64,
    feature_names: &[String],
) -> Result<LinearModel, ModelError> {
    assert!(!x.is_empty(), "empty training set");
    assert_eq!(x.len(), y.len(), "feature/target length mismatch");
    let p = x[0].len();
    assert_eq!(feature_names.len(), p, "one name per feature column");
    assert!(ridge >= 0.0, "negative ridge");
    check_width(p, x)?;

    // Augmented design: n data rows [x | 1], then p ridge rows [√λ·e_i | 0].
    let n = x.len();
    let rows = n + if ridge > 0.0 { p } else { 0 };
    let cols = p + 1;
    let mut a = vec![vec![0.0; cols]; rows];
    let mut rhs = vec![0.0; rows];
    for (i, row) in x.iter().enumerate() {
        a[i][..p].copy_from_slice(row);
        a[i][p] = 1.0;
        rhs[i] = y[i];
    }
    if ridge > 0.0 {
        let sqrt_ridge = ridge.sqrt();
        for j in 0..p {
            a[n + j][j] = sqrt_ridge;
        }
    }

    // Householder QR applied in place; reflections hit the rhs as they go.
    for k in 0..cols.min(rows) {
        let mut norm = 0.0;
        for row in a.iter().take(rows).skip(k) {
            norm += row[k] * row[k];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..rows).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let v_norm_sq: f64 = v.iter().map(|t| t * t).sum();
        if v_norm_sq == 0.0 {
            continue;
        }
        for j in k..cols {
            let dot: f64 = (k..rows).map(|i| v[i - k] * a[i][j]).sum();
            let scale = 2.0 * dot / v_norm_sq;
            for i in k..rows {
                a[i][j] -= scale * v[i - k];
            }
        }
        let dot: f64 = (k..rows).map(|i| v[i - k] * rhs[i]).sum();
        let scale = 2.0 * dot / v_norm_sq;
        for i in k..rows {
            rhs[i] -= scale * v[i - k];
        }
    }

    // Back-substitute R·sol = Qᵀy.
    let scale_reference: f64 = (0..cols).map(|j| a[j][j].abs()).fold(0.0, f64::max);
    let mut solution = vec![0.0; cols];
    for j in (0..cols).rev() {
        let mut acc = rhs[j];
        for m in j + 1..cols {
            acc -= a[j][m] * solution[m];
        }
        if a[j][j].abs() <= scale_reference * 1e-14 {
            return Err(ModelError::SingularSystem);
        }
        solution[j] = acc / a[j][j];
    }

    Ok(LinearModel {
        weights: solution[..p].to_vec(),
        intercept: solution[p],
        feature_names: feature_names.to_vec(),
    })
}
