//! Principal component analysis via a cyclic Jacobi eigensolver on the
//! sample covariance matrix.
//!
//! Jacobi is slow next to a tridiagonalizing solver but is simple, fully
//! deterministic, and accurate to round-off — the right trade for feature
//! matrices with at most a few hundred columns.

use super::PreprocessError;

/// Fitted projection: column means, top eigenvectors (one per row of
/// `components`), and the *full* eigenvalue spectrum of the covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `n_components × n_cols`, rows orthonormal.
    pub components: Vec<Vec<f64>>,
    /// All `n_cols` eigenvalues, descending, non-negative. Kept in full so
    /// explained-variance ratios are computable regardless of truncation.
    pub eigenvalues: Vec<f64>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn n_cols(&self) -> usize {
        self.mean.len()
    }

    /// Fraction of total variance captured by the first `k` components.
    pub fn explained_fraction(&self, k: usize) -> f64 {
        let total: f64 = self.eigenvalues.iter().sum();
        if total == 0.0 {
            return 1.0;
        }
        self.eigenvalues.iter().take(k).sum::<f64>() / total
    }

    /// Smallest component count whose cumulative variance reaches `fraction`.
    pub fn components_for_fraction(&self, fraction: f64) -> usize {
        for k in 1..=self.eigenvalues.len() {
            if self.explained_fraction(k) >= fraction {
                return k;
            }
        }
        self.eigenvalues.len()
    }

    /// Copy of the model keeping only the leading `k` components.
    pub fn truncated(&self, k: usize) -> Result<PcaModel, PreprocessError> {
        if k > self.n_components() {
            return Err(PreprocessError::TooManyComponents { requested: k, n_cols: self.n_components() });
        }
        Ok(PcaModel {
            mean: self.mean.clone(),
            components: self.components[..k].to_vec(),
            eigenvalues: self.eigenvalues.clone(),
        })
    }
}

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Frobenius norm of the strictly-off-diagonal part.
fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut sum = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            sum += 2.0 * a[p][q] * a[p][q];
        }
    }
    sum.sqrt()
}

/// Cyclic Jacobi: rotate away each off-diagonal element in turn until the
/// off-diagonal norm drops below tolerance. Returns (eigenvalues,
/// eigenvectors) with eigenvector `j` in column `j` of the returned matrix.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < JACOBI_TOL {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for i in 0..n {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[p][i];
                    let aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for row in v.iter_mut() {
                    let vip = row[p];
                    let viq = row[q];
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }
    let eigenvalues = (0..n).map(|i| a[i][i]).collect();
    (eigenvalues, v)
}

/// Fit PCA on `rows` (training partition only): center by column means,
/// eigendecompose the sample covariance, keep the top `n_components`
/// eigenvectors. Sign convention: each component's largest-magnitude entry
/// is made positive, so the decomposition is unique and reproducible.
pub fn pca_fit(rows: &[Vec<f64>], n_components: usize) -> Result<PcaModel, PreprocessError> {
    assert!(rows.len() >= 2, "sample covariance needs at least two rows");
    let n_cols = rows[0].len();
    assert!(rows.iter().all(|r| r.len() == n_cols), "ragged input");
    if n_components > n_cols {
        return Err(PreprocessError::TooManyComponents { requested: n_components, n_cols });
    }

    let n = rows.len() as f64;
    let mut mean = vec![0.0; n_cols];
    for row in rows {
        for (c, value) in row.iter().enumerate() {
            mean[c] += value;
        }
    }
    for m in &mut mean {
        *m /= n;
    }

    let mut covariance = vec![vec![0.0; n_cols]; n_cols];
    for row in rows {
        for i in 0..n_cols {
            let di = row[i] - mean[i];
            for j in i..n_cols {
                covariance[i][j] += di * (row[j] - mean[j]);
            }
        }
    }
    for i in 0..n_cols {
        for j in i..n_cols {
            covariance[i][j] /= n - 1.0;
            covariance[j][i] = covariance[i][j];
        }
    }

    let (raw_eigenvalues, vectors) = jacobi_eigen(covariance);

    let mut order: Vec<usize> = (0..n_cols).collect();
    order.sort_by(|&a, &b| raw_eigenvalues[b].partial_cmp(&raw_eigenvalues[a]).unwrap().then(a.cmp(&b)));

    // Round-off can leave eigenvalues of a PSD matrix a hair negative.
    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw_eigenvalues[i].max(0.0)).collect();

    let mut components: Vec<Vec<f64>> = Vec::with_capacity(n_components);
    for &col in order.iter().take(n_components) {
        let mut component: Vec<f64> = (0..n_cols).map(|r| vectors[r][col]).collect();
        let dominant = component
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().partial_cmp(&b.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if component[dominant] < 0.0 {
            for entry in &mut component {
                *entry = -*entry;
            }
        }
        components.push(component);
    }

    Ok(PcaModel { mean, components, eigenvalues })
}

/// Project rows into component space: `(x − mean) · componentsᵀ`.
pub fn pca_transform(rows: &[Vec<f64>], model: &PcaModel) -> Result<Vec<Vec<f64>>, PreprocessError> {
    let n_cols = model.n_cols();
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(PreprocessError::ColumnMismatch {
            expected: format!("{n_cols} columns"),
            found: format!("{} columns", rows.iter().map(Vec::len).find(|&w| w != n_cols).unwrap_or(0)),
        });
    }
    Ok(rows
        .iter()
        .map(|row| {
            model
                .components
                .iter()
                .map(|component| {
                    component.iter().zip(row).zip(&model.mean).map(|((w, x), m)| w * (x - m)).sum()
                })
                .collect()
        })
        .collect())
}

/// Map projected rows back to the original space: `z · components + mean`.
/// Exact only when the model kept all components.
pub fn pca_inverse_transform(projected: &[Vec<f64>], model: &PcaModel) -> Vec<Vec<f64>> {
    projected
        .iter()
        .map(|z| {
            let mut row = model.mean.clone();
            for (weight, component) in z.iter().zip(&model.components) {
                for (r, entry) in row.iter_mut().zip(component) {
                    *r += weight * entry;
                }
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rows(rng: &mut ChaCha8Rng, n_rows: usize, n_cols: usize) -> Vec<Vec<f64>> {
        (0..n_rows).map(|_| (0..n_cols).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect()
    }

    #[test]
    fn collinear_points_give_rank_one_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|_| {
                let t: f64 = rng.gen_range(-3.0..3.0);
                vec![2.0 * t + 1.0, -t + 4.0]
            })
            .collect();
        let model = pca_fit(&rows, 2).unwrap();
        let total: f64 = model.eigenvalues.iter().sum();
        assert!(model.eigenvalues[0] / total >= 1.0 - 1e-9);
    }

    #[test]
    fn full_round_trip_recovers_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rows = random_rows(&mut rng, 30, 5);
        let model = pca_fit(&rows, 5).unwrap();
        let back = pca_inverse_transform(&pca_transform(&rows, &model).unwrap(), &model);
        for (a, b) in rows.iter().zip(&back) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-9, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn components_are_orthonormal_and_variance_is_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows = random_rows(&mut rng, 50, 6);
        let model = pca_fit(&rows, 6).unwrap();

        for i in 0..6 {
            for j in 0..6 {
                let dot: f64 =
                    model.components[i].iter().zip(&model.components[j]).map(|(a, b)| a * b).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-9, "component {i}·{j} = {dot}");
            }
        }

        // Σ eigenvalues == trace of the covariance
        let n = rows.len() as f64;
        let mut trace = 0.0;
        for c in 0..6 {
            let mean: f64 = rows.iter().map(|r| r[c]).sum::<f64>() / n;
            trace += rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        }
        let sum: f64 = model.eigenvalues.iter().sum();
        assert!((sum - trace).abs() < 1e-9, "eigenvalue sum {sum} vs trace {trace}");

        // spectrum sorted descending, non-negative
        for pair in model.eigenvalues.windows(2) {
            assert!(pair[0] >= pair[1]);
        }
        assert!(model.eigenvalues.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn sign_convention_makes_dominant_entry_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows = random_rows(&mut rng, 40, 4);
        let model = pca_fit(&rows, 4).unwrap();
        for component in &model.components {
            let dominant = component
                .iter()
                .cloned()
                .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
                .unwrap();
            assert!(dominant > 0.0);
        }
    }

    #[test]
    fn too_many_components_is_an_error() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 7.0]];
        assert!(matches!(
            pca_fit(&rows, 3),
            Err(PreprocessError::TooManyComponents { requested: 3, n_cols: 2 })
        ));
    }

    #[test]
    fn eigenvectors_satisfy_the_eigen_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows = random_rows(&mut rng, 80, 5);
        let model = pca_fit(&rows, 5).unwrap();

        // rebuild the sample covariance independently
        let n = rows.len() as f64;
        let n_cols = 5;
        let mean: Vec<f64> =
            (0..n_cols).map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n).collect();
        let mut cov = vec![vec![0.0; n_cols]; n_cols];
        for row in &rows {
            for i in 0..n_cols {
                for j in 0..n_cols {
                    cov[i][j] += (row[i] - mean[i]) * (row[j] - mean[j]) / (n - 1.0);
                }
            }
        }
        for (k, component) in model.components.iter().enumerate() {
            for i in 0..n_cols {
                let cv: f64 = (0..n_cols).map(|j| cov[i][j] * component[j]).sum();
                assert!(
                    (cv - model.eigenvalues[k] * component[i]).abs() < 1e-8,
                    "C·v ≠ λv at component {k}, row {i}"
                );
            }
        }
    }

    // ---- independent eigensolver oracle: characteristic polynomial via
    // ---- Faddeev–LeVerrier, roots isolated by bisection.

    fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                let aik = a[i][k];
                for j in 0..n {
                    out[i][j] += aik * b[k][j];
                }
            }
        }
        out
    }

    /// Coefficients c of λⁿ + c[0]·λⁿ⁻¹ + … + c[n−1] for det(λI − A).
    fn characteristic_polynomial(a: &[Vec<f64>]) -> Vec<f64> {
        let n = a.len();
        let mut coeffs = Vec::with_capacity(n);
        let mut m = a.to_vec();
        for k in 1..=n {
            let trace: f64 = (0..n).map(|i| m[i][i]).sum();
            let c = -trace / k as f64;
            coeffs.push(c);
            if k == n {
                break;
            }
            for i in 0..n {
                m[i][i] += c;
            }
            m = mat_mul(a, &m);
        }
        coeffs
    }

    fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
        let mut acc = 1.0;
        for c in coeffs {
            acc = acc * x + c;
        }
        acc
    }

    /// All real roots of the characteristic polynomial of a symmetric
    /// matrix, by sign-change bisection over a Gershgorin-bounded grid.
    fn eigenvalues_by_bisection(a: &[Vec<f64>]) -> Vec<f64> {
        let coeffs = characteristic_polynomial(a);
        let n = a.len();
        let bound = (0..n)
            .map(|i| (0..n).map(|j| a[i][j].abs()).sum::<f64>())
            .fold(0.0f64, f64::max)
            + 1.0;
        let steps = 40_000;
        let width = 2.0 * bound / steps as f64;
        let mut roots = Vec::new();
        let mut x0 = -bound;
        let mut f0 = poly_eval(&coeffs, x0);
        for s in 1..=steps {
            let x1 = -bound + s as f64 * width;
            let f1 = poly_eval(&coeffs, x1);
            if f0 == 0.0 {
                roots.push(x0);
            } else if f0 * f1 < 0.0 {
                let (mut lo, mut hi) = (x0, x1);
                let (mut flo, _fhi) = (f0, f1);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fmid = poly_eval(&coeffs, mid);
                    if flo * fmid <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fmid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            x0 = x1;
            f0 = f1;
        }
        roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
        roots
    }

    #[test]
    fn jacobi_spectrum_matches_characteristic_polynomial_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rows = random_rows(&mut rng, 40, 6);
        let model = pca_fit(&rows, 6).unwrap();

        let n = rows.len() as f64;
        let n_cols = 6;
        let mean: Vec<f64> =
            (0..n_cols).map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n).collect();
        let mut cov = vec![vec![0.0; n_cols]; n_cols];
        for row in &rows {
            for i in 0..n_cols {
                for j in 0..n_cols {
                    cov[i][j] += (row[i] - mean[i]) * (row[j] - mean[j]) / (n - 1.0);
                }
            }
        }

        let oracle = eigenvalues_by_bisection(&cov);
        assert_eq!(oracle.len(), n_cols, "oracle should isolate all six roots");
        for (got, expected) in model.eigenvalues.iter().zip(&oracle) {
            assert!((got - expected).abs() < 1e-8, "{got} vs oracle {expected}");
        }
    }

    #[test]
    fn transform_rejects_wrong_width() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, 5.0], vec![-1.0, 0.5]];
        let model = pca_fit(&rows, 2).unwrap();
        assert!(pca_transform(&[vec![1.0, 2.0, 3.0]], &model).is_err());
    }

    #[test]
    fn variance_fraction_helpers() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // strong first direction, weak second
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|_| {
                let t: f64 = rng.gen_range(-10.0..10.0);
                let noise: f64 = rng.gen_range(-0.1..0.1);
                vec![t, t + noise, noise]
            })
            .collect();
        let model = pca_fit(&rows, 3).unwrap();
        assert_eq!(model.components_for_fraction(0.95), 1);
        assert!(model.explained_fraction(3) > 0.999999);
        let truncated = model.truncated(1).unwrap();
        assert_eq!(truncated.n_components(), 1);
        assert!(model.truncated(4).is_err());
    }
}
