//! Dense feature matrix shared by the price and sentiment pipelines.

use super::PreprocessError;

/// A dense table of named feature columns with an aligned target vector and
/// an ordered row index (dates for price data, record ids for text).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub column_names: Vec<String>,
    /// Row-major, every row exactly `column_names.len()` wide.
    pub rows: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub index: Vec<String>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_position(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[col]).collect()
    }

    /// Check the structural invariants: rectangular, aligned lengths, at
    /// least one row, unique column names, every value finite.
    pub fn validate(&self) -> Result<(), PreprocessError> {
        if self.rows.is_empty() {
            return Err(PreprocessError::Invalid("matrix has no rows".into()));
        }
        if self.target.len() != self.rows.len() || self.index.len() != self.rows.len() {
            return Err(PreprocessError::Invalid(format!(
                "misaligned lengths: {} rows, {} targets, {} index keys",
                self.rows.len(),
                self.target.len(),
                self.index.len()
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.column_names.len() {
                return Err(PreprocessError::Invalid(format!(
                    "row {i} has {} values, expected {}",
                    row.len(),
                    self.column_names.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(PreprocessError::Invalid(format!(
                    "non-finite value in row {i}, column {}",
                    self.column_names[j]
                )));
            }
        }
        if let Some(t) = self.target.iter().position(|v| !v.is_finite()) {
            return Err(PreprocessError::Invalid(format!("non-finite target at row {t}")));
        }
        for (i, name) in self.column_names.iter().enumerate() {
            if self.column_names[..i].contains(name) {
                return Err(PreprocessError::Invalid(format!("duplicate column name {name:?}")));
            }
        }
        Ok(())
    }

    /// Copy of the rows in `range` (used to materialize split partitions).
    pub fn take_rows(&self, range: std::ops::Range<usize>) -> FeatureMatrix {
        FeatureMatrix {
            column_names: self.column_names.clone(),
            rows: self.rows[range.clone()].to_vec(),
            target: self.target[range.clone()].to_vec(),
            index: self.index[range].to_vec(),
        }
    }

    /// Keep only the named columns, in the order given.
    pub fn select_columns(&self, names: &[String]) -> Result<FeatureMatrix, PreprocessError> {
        let positions: Vec<usize> = names
            .iter()
            .map(|n| {
                self.column_position(n).ok_or_else(|| PreprocessError::ColumnMismatch {
                    expected: n.clone(),
                    found: "(absent)".to_string(),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(FeatureMatrix {
            column_names: names.to_vec(),
            rows: self.rows.iter().map(|r| positions.iter().map(|&p| r[p]).collect()).collect(),
            target: self.target.clone(),
            index: self.index.clone(),
        })
    }

    /// Re-point each row's target `horizon` rows ahead, dropping the final
    /// `horizon` rows that have no future value. `horizon` 0 is the
    /// identity. Row `t` keeps its own index key: the key names the day the
    /// features were observed, not the day being predicted.
    pub fn shift_target(&self, horizon: usize) -> Result<FeatureMatrix, PreprocessError> {
        if horizon >= self.n_rows() {
            return Err(PreprocessError::HorizonTooLarge { horizon, rows: self.n_rows() });
        }
        let keep = self.n_rows() - horizon;
        Ok(FeatureMatrix {
            column_names: self.column_names.clone(),
            rows: self.rows[..keep].to_vec(),
            target: self.target[horizon..].to_vec(),
            index: self.index[..keep].to_vec(),
        })
    }

    /// Serialize as CSV: a leading `date` index column, the feature columns,
    /// and a trailing `target` column. Floats print in shortest
    /// round-trip form so `from_csv` recovers the matrix exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date");
        for name in &self.column_names {
            out.push(',');
            out.push_str(name);
        }
        out.push_str(",target\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(&self.index[i]);
            for v in row {
                out.push(',');
                out.push_str(&format!("{v}"));
            }
            out.push_str(&format!(",{}\n", self.target[i]));
        }
        out
    }

    /// Parse the CSV shape written by [`to_csv`]: first column is the row
    /// index, last column must be named `target`, everything between is a
    /// feature column.
    pub fn from_csv(text: &str) -> Result<FeatureMatrix, PreprocessError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| PreprocessError::Csv("empty document".into()))?;
        let header_cells: Vec<&str> = header.split(',').collect();
        if header_cells.len() < 3 {
            return Err(PreprocessError::Csv(format!(
                "header needs index, at least one feature, and target; got {} columns",
                header_cells.len()
            )));
        }
        if *header_cells.last().unwrap() != "target" {
            return Err(PreprocessError::Csv(format!(
                "last column must be named \"target\", found {:?}",
                header_cells.last().unwrap()
            )));
        }
        let column_names: Vec<String> =
            header_cells[1..header_cells.len() - 1].iter().map(|s| s.to_string()).collect();

        let mut rows = Vec::new();
        let mut target = Vec::new();
        let mut index = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != header_cells.len() {
                return Err(PreprocessError::Csv(format!(
                    "row {} has {} cells, expected {}",
                    lineno + 1,
                    cells.len(),
                    header_cells.len()
                )));
            }
            index.push(cells[0].to_string());
            let mut row = Vec::with_capacity(column_names.len());
            for (c, cell) in cells[1..cells.len() - 1].iter().enumerate() {
                row.push(cell.parse::<f64>().map_err(|_| {
                    PreprocessError::Csv(format!(
                        "row {}, column {}: {cell:?} is not a number",
                        lineno + 1,
                        column_names[c]
                    ))
                })?);
            }
            rows.push(row);
            target.push(cells[cells.len() - 1].parse::<f64>().map_err(|_| {
                PreprocessError::Csv(format!("row {}: bad target {:?}", lineno + 1, cells[cells.len() - 1]))
            })?);
        }
        let matrix = FeatureMatrix { column_names, rows, target, index };
        matrix.validate()?;
        Ok(matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureMatrix {
        FeatureMatrix {
            column_names: vec!["a".into(), "b".into()],
            rows: vec![vec![1.0, 10.0], vec![2.0, 20.0], vec![3.0, 30.0], vec![4.0, 40.0]],
            target: vec![100.0, 200.0, 300.0, 400.0],
            index: (1..=4).map(|i| format!("r{i}")).collect(),
        }
    }

    #[test]
    fn validate_accepts_wellformed() {
        sample().validate().unwrap();
    }

    #[test]
    fn validate_rejects_ragged_rows() {
        let mut m = sample();
        m.rows[2].pop();
        assert!(m.validate().is_err());
    }

    #[test]
    fn validate_rejects_nan() {
        let mut m = sample();
        m.rows[1][0] = f64::NAN;
        assert!(m.validate().is_err());
    }

    #[test]
    fn validate_rejects_duplicate_names() {
        let mut m = sample();
        m.column_names[1] = "a".into();
        assert!(m.validate().is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let m = FeatureMatrix {
            column_names: vec!["x".into(), "y".into()],
            rows: vec![vec![0.1, 1.0 / 3.0], vec![-2.5e-8, 7.0]],
            target: vec![1.23456789012345e10, -0.25],
            index: vec!["2020-01-02".into(), "2020-01-03".into()],
        };
        let parsed = FeatureMatrix::from_csv(&m.to_csv()).unwrap();
        assert_eq!(parsed, m);
    }

    #[test]
    fn from_csv_requires_target_column() {
        let text = "date,a,b\n2020-01-02,1,2\n";
        assert!(FeatureMatrix::from_csv(text).is_err());
    }

    #[test]
    fn shift_target_moves_values_forward() {
        let m = sample();
        let shifted = m.shift_target(1).unwrap();
        assert_eq!(shifted.n_rows(), 3);
        assert_eq!(shifted.target, vec![200.0, 300.0, 400.0]);
        assert_eq!(shifted.rows[0], vec![1.0, 10.0]);
        assert_eq!(shifted.index, vec!["r1", "r2", "r3"]);
        // horizon 0 is the identity
        assert_eq!(m.shift_target(0).unwrap(), m);
    }

    #[test]
    fn shift_target_rejects_oversized_horizon() {
        assert!(matches!(
            sample().shift_target(4),
            Err(PreprocessError::HorizonTooLarge { horizon: 4, rows: 4 })
        ));
    }

    #[test]
    fn select_columns_reorders() {
        let m = sample();
        let picked = m.select_columns(&["b".into(), "a".into()]).unwrap();
        assert_eq!(picked.column_names, vec!["b", "a"]);
        assert_eq!(picked.rows[0], vec![10.0, 1.0]);
        assert!(m.select_columns(&["zzz".into()]).is_err());
    }

    #[test]
    fn take_rows_slices_all_parallel_vectors() {
        let m = sample();
        let mid = m.take_rows(1..3);
        assert_eq!(mid.n_rows(), 2);
        assert_eq!(mid.target, vec![200.0, 300.0]);
        assert_eq!(mid.index, vec!["r2", "r3"]);
    }
}
