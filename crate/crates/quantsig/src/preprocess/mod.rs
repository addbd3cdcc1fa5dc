//! Feature preparation: min-max scaling, correlation-based feature
//! selection, chronological splitting, and PCA.
//!
//! Everything here is a pure function; fitting operations (scaler, PCA,
//! selection) are meant to see *training rows only* — the pipeline is
//! responsible for that discipline, this module just makes the fit/apply
//! boundary explicit in the types.

mod frame;
mod pca;

pub use frame::FeatureMatrix;
pub use pca::{pca_fit, pca_inverse_transform, pca_transform, PcaModel};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("column mismatch: expected {expected:?}, found {found:?}")]
    ColumnMismatch { expected: String, found: String },
    #[error("zero variance in {0}")]
    ZeroVariance(String),
    #[error("split fractions must be positive and sum to 1, got ({0}, {1}, {2})")]
    BadFractions(f64, f64, f64),
    #[error("split leaves an empty partition for {n_rows} rows")]
    EmptySplit { n_rows: usize },
    #[error("requested {requested} components from {n_cols} columns")]
    TooManyComponents { requested: usize, n_cols: usize },
    #[error("horizon {horizon} leaves no rows (matrix has {rows})")]
    HorizonTooLarge { horizon: usize, rows: usize },
    #[error("invalid matrix: {0}")]
    Invalid(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// Per-column extremes captured from a training matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerParams {
    pub column_names: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Record the column-wise min and max of `matrix` (training rows only).
pub fn fit_minmax(matrix: &FeatureMatrix) -> ScalerParams {
    let n_cols = matrix.n_cols();
    let mut min = vec![f64::INFINITY; n_cols];
    let mut max = vec![f64::NEG_INFINITY; n_cols];
    for row in &matrix.rows {
        for (c, v) in row.iter().enumerate() {
            min[c] = min[c].min(*v);
            max[c] = max[c].max(*v);
        }
    }
    ScalerParams { column_names: matrix.column_names.clone(), min, max }
}

/// Map each value to `(v − min)/(max − min)` with the training extremes.
/// Constant columns map to 0; values outside the training range land
/// outside [0,1] — no clipping, by contract.
pub fn apply_minmax(matrix: &FeatureMatrix, params: &ScalerParams) -> Result<FeatureMatrix, PreprocessError> {
    if matrix.column_names != params.column_names {
        let expected = params.column_names.join(",");
        let found = matrix.column_names.join(",");
        return Err(PreprocessError::ColumnMismatch { expected, found });
    }
    let rows = matrix
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(c, v)| {
                    let range = params.max[c] - params.min[c];
                    if range == 0.0 {
                        0.0
                    } else {
                        (v - params.min[c]) / range
                    }
                })
                .collect()
        })
        .collect();
    Ok(FeatureMatrix {
        column_names: matrix.column_names.clone(),
        rows,
        target: matrix.target.clone(),
        index: matrix.index.clone(),
    })
}

/// Pearson correlation coefficient of two equal-length vectors.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, PreprocessError> {
    assert_eq!(x.len(), y.len(), "pearson needs equal lengths");
    assert!(x.len() >= 2, "pearson needs at least two points");
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 {
        return Err(PreprocessError::ZeroVariance("first argument".into()));
    }
    if var_y == 0.0 {
        return Err(PreprocessError::ZeroVariance("second argument".into()));
    }
    // rounding can push the ratio a hair past ±1
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// Why a column did or did not survive [`select_features`].
#[derive(Debug, Clone, PartialEq)]
pub enum SelectionDecision {
    Kept,
    /// Too correlated with a column that was already kept.
    RedundantWith { column: String, correlation: f64 },
    /// Constant column — no usable correlation with anything.
    ZeroVariance,
    /// Ranked below the point where `top_k` columns had been kept.
    BeyondTopK,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionEntry {
    pub column: String,
    /// |pearson(column, target)|; None for zero-variance columns.
    pub score: Option<f64>,
    /// Position in the |correlation| ranking; None for zero-variance columns.
    pub rank: Option<usize>,
    pub decision: SelectionDecision,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    /// One entry per input column, in input column order.
    pub entries: Vec<SelectionEntry>,
    /// Kept column names in rank order (the output matrix's column order).
    pub kept: Vec<String>,
}

/// Filter-style feature selection: rank columns by |pearson| with the
/// target, then walk the ranking keeping a column unless it correlates
/// above `redundancy_rho` (absolute) with something already kept, stopping
/// once `top_k` columns are kept.
pub fn select_features(
    matrix: &FeatureMatrix,
    top_k: usize,
    redundancy_rho: f64,
) -> Result<(FeatureMatrix, SelectionReport), PreprocessError> {
    assert!(top_k >= 1, "top_k must be at least 1");
    matrix.validate()?;

    let columns: Vec<Vec<f64>> = (0..matrix.n_cols()).map(|c| matrix.column(c)).collect();
    let mut scores: Vec<Option<f64>> = Vec::with_capacity(columns.len());
    for (c, col) in columns.iter().enumerate() {
        match pearson(col, &matrix.target) {
            Ok(r) => scores.push(Some(r.abs())),
            Err(PreprocessError::ZeroVariance(which)) if which == "first argument" => scores.push(None),
            Err(e) => {
                // a constant target makes every correlation undefined
                debug_assert!(matches!(e, PreprocessError::ZeroVariance(_)), "unexpected {e:?} for column {c}");
                return Err(PreprocessError::ZeroVariance("target".into()));
            }
        }
    }

    // Rank by |correlation| descending; ties resolved by column order.
    let mut ranking: Vec<usize> = (0..columns.len()).filter(|&c| scores[c].is_some()).collect();
    ranking.sort_by(|&a, &b| {
        scores[b].unwrap().partial_cmp(&scores[a].unwrap()).unwrap().then(a.cmp(&b))
    });

    let mut decisions: Vec<Option<SelectionDecision>> = vec![None; columns.len()];
    let mut ranks: Vec<Option<usize>> = vec![None; columns.len()];
    let mut kept_cols: Vec<usize> = Vec::new();
    for (rank, &c) in ranking.iter().enumerate() {
        ranks[c] = Some(rank);
        if kept_cols.len() == top_k {
            decisions[c] = Some(SelectionDecision::BeyondTopK);
            continue;
        }
        let mut redundant: Option<(usize, f64)> = None;
        for &k in &kept_cols {
            let r = pearson(&columns[c], &columns[k]).expect("both columns non-constant");
            if r.abs() > redundancy_rho {
                redundant = Some((k, r));
                break;
            }
        }
        match redundant {
            Some((k, r)) => {
                decisions[c] = Some(SelectionDecision::RedundantWith {
                    column: matrix.column_names[k].clone(),
                    correlation: r,
                })
            }
            None => {
                decisions[c] = Some(SelectionDecision::Kept);
                kept_cols.push(c);
            }
        }
    }

    let entries = (0..columns.len())
        .map(|c| SelectionEntry {
            column: matrix.column_names[c].clone(),
            score: scores[c],
            rank: ranks[c],
            decision: decisions[c].clone().unwrap_or(SelectionDecision::ZeroVariance),
        })
        .collect();
    let kept: Vec<String> = kept_cols.iter().map(|&c| matrix.column_names[c].clone()).collect();
    let selected = matrix.select_columns(&kept)?;
    Ok((selected, SelectionReport { entries, kept }))
}

/// Contiguous, strictly ordered row ranges for train/validation/test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: std::ops::Range<usize>,
    pub validation: std::ops::Range<usize>,
    pub test: std::ops::Range<usize>,
}

/// Split `n_rows` time-ordered rows at `floor(n·f_train)` and
/// `floor(n·(f_train+f_val))`; the test partition takes the remainder.
/// No shuffling — training strictly precedes validation precedes test.
pub fn chronological_split(
    n_rows: usize,
    fractions: (f64, f64, f64),
) -> Result<SplitIndices, PreprocessError> {
    assert!(n_rows >= 3, "need at least one row per partition");
    let (f_train, f_val, f_test) = fractions;
    let sum = f_train + f_val + f_test;
    if f_train <= 0.0 || f_val <= 0.0 || f_test <= 0.0 || (sum - 1.0).abs() > 1e-9 {
        return Err(PreprocessError::BadFractions(f_train, f_val, f_test));
    }
    let n = n_rows as f64;
    let train_end = (n * f_train).floor() as usize;
    let val_end = (n * (f_train + f_val)).floor() as usize;
    if train_end == 0 || val_end == train_end || val_end == n_rows {
        return Err(PreprocessError::EmptySplit { n_rows });
    }
    Ok(SplitIndices { train: 0..train_end, validation: train_end..val_end, test: val_end..n_rows })
}

pub const DEFAULT_SPLIT: (f64, f64, f64) = (0.70, 0.15, 0.15);
