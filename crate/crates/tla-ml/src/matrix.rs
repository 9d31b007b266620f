//! Named, rectangular feature matrix: the common currency of the ML stage.

use tla_core::Real;

use crate::error::{MlError, Result};

/// A rectangular matrix of finite values with uniquely named columns,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    names: Vec<String>,
    data: Vec<T>,
    rows: usize,
}

impl<T: Real> FeatureMatrix<T> {
    /// Builds a matrix from row-major data. Validates shape, finiteness, and
    /// column-name uniqueness.
    pub fn new(names: Vec<String>, data: Vec<T>, rows: usize) -> Result<Self> {
        let cols = names.len();
        if cols == 0 {
            return Err(MlError::BadMatrix("a matrix needs at least one column".into()));
        }
        if data.len() != rows * cols {
            return Err(MlError::BadMatrix(format!(
                "data length {} does not match {rows} rows x {cols} cols",
                data.len()
            )));
        }
        let mut sorted = names.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(MlError::BadMatrix("duplicate column names".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(MlError::BadMatrix("matrix contains non-finite values".into()));
        }
        Ok(Self { names, data, rows })
    }

    /// Builds a matrix from equal-length named columns.
    pub fn from_columns(columns: Vec<(String, Vec<T>)>) -> Result<Self> {
        if columns.is_empty() {
            return Err(MlError::BadMatrix("a matrix needs at least one column".into()));
        }
        let rows = columns[0].1.len();
        if columns.iter().any(|(_, c)| c.len() != rows) {
            return Err(MlError::BadMatrix("columns have different lengths".into()));
        }
        let names = columns.iter().map(|(n, _)| n.clone()).collect();
        let mut data = Vec::with_capacity(rows * columns.len());
        for r in 0..rows {
            for (_, c) in &columns {
                data.push(c[r]);
            }
        }
        Self::new(names, data, rows)
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.n_cols() + col]
    }

    /// One row as a slice.
    pub fn row(&self, row: usize) -> &[T] {
        let c = self.n_cols();
        &self.data[row * c..(row + 1) * c]
    }

    /// One column, copied out.
    pub fn column(&self, col: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Index of a column by name.
    pub fn col_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// New matrix keeping only the named columns, in the given order.
    pub fn select_columns(&self, keep: &[String]) -> Result<Self> {
        let idx: Vec<usize> = keep
            .iter()
            .map(|n| {
                self.col_index(n)
                    .ok_or_else(|| MlError::BadMatrix(format!("no column named '{n}'")))
            })
            .collect::<Result<_>>()?;
        let mut data = Vec::with_capacity(self.rows * idx.len());
        for r in 0..self.rows {
            for &c in &idx {
                data.push(self.get(r, c));
            }
        }
        Self::new(keep.to_vec(), data, self.rows)
    }

    /// New matrix keeping only the given rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> Result<Self> {
        if let Some(&bad) = keep.iter().find(|&&r| r >= self.rows) {
            return Err(MlError::BadMatrix(format!(
                "row index {bad} out of bounds (n = {})",
                self.rows
            )));
        }
        let mut data = Vec::with_capacity(keep.len() * self.n_cols());
        for &r in keep {
            data.extend_from_slice(self.row(r));
        }
        Self::new(self.names.clone(), data, keep.len())
    }

    /// Appends the columns of `other` (same row count, disjoint names).
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(MlError::BadMatrix(format!(
                "row counts differ: {} vs {}",
                self.rows, other.rows
            )));
        }
        let names: Vec<String> = self.names.iter().chain(&other.names).cloned().collect();
        let mut data = Vec::with_capacity(self.rows * names.len());
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(other.row(r));
        }
        Self::new(names, data, self.rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureMatrix<f64> {
        FeatureMatrix::from_columns(vec![
            ("a".into(), vec![1.0, 2.0, 3.0]),
            ("b".into(), vec![4.0, 5.0, 6.0]),
        ])
        .unwrap()
    }

    #[test]
    fn round_trips_rows_and_columns() {
        let m = sample();
        assert_eq!(m.n_rows(), 3);
        assert_eq!(m.n_cols(), 2);
        assert_eq!(m.row(1), &[2.0, 5.0]);
        assert_eq!(m.column(1), vec![4.0, 5.0, 6.0]);
        assert_eq!(m.get(2, 0), 3.0);
        assert_eq!(m.col_index("b"), Some(1));
        assert_eq!(m.col_index("zzz"), None);
    }

    #[test]
    fn selection_and_stacking() {
        let m = sample();
        let only_b = m.select_columns(&["b".into()]).unwrap();
        assert_eq!(only_b.n_cols(), 1);
        assert_eq!(only_b.column(0), vec![4.0, 5.0, 6.0]);

        let reordered = m.select_columns(&["b".into(), "a".into()]).unwrap();
        assert_eq!(reordered.row(0), &[4.0, 1.0]);

        let sub = m.select_rows(&[2, 0]).unwrap();
        assert_eq!(sub.column(0), vec![3.0, 1.0]);

        let c = FeatureMatrix::from_columns(vec![("c".into(), vec![7.0, 8.0, 9.0])]).unwrap();
        let wide = m.hstack(&c).unwrap();
        assert_eq!(wide.names(), &["a", "b", "c"]);
        assert_eq!(wide.row(0), &[1.0, 4.0, 7.0]);
    }

    #[test]
    fn validation_rejects_malformed_input() {
        assert!(matches!(
            FeatureMatrix::<f64>::new(vec!["a".into()], vec![1.0, 2.0, 3.0], 2),
            Err(MlError::BadMatrix(_))
        ));
        assert!(matches!(
            FeatureMatrix::<f64>::new(vec!["a".into(), "a".into()], vec![1.0, 2.0], 1),
            Err(MlError::BadMatrix(_))
        ));
        assert!(matches!(
            FeatureMatrix::<f64>::new(vec!["a".into()], vec![f64::NAN], 1),
            Err(MlError::BadMatrix(_))
        ));
        assert!(matches!(
            FeatureMatrix::<f64>::from_columns(vec![
                ("a".into(), vec![1.0]),
                ("b".into(), vec![1.0, 2.0]),
            ]),
            Err(MlError::BadMatrix(_))
        ));
        let m = sample();
        assert!(m.select_rows(&[5]).is_err());
        assert!(m.select_columns(&["missing".into()]).is_err());
    }
}
