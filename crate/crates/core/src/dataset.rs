use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major `M x N` matrix of finite features.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(Error::Data(format!(
                    "row {i} has {} columns, expected {n_cols}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(n_rows, n_cols, values)
    }

    pub fn from_flat(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::Data(format!(
                "dataset must be at least 1x1, got {n_rows}x{n_cols}"
            )));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::Data(format!(
                "{} values do not fill a {n_rows}x{n_cols} dataset",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value at row {}, column {}",
                pos / n_cols,
                pos % n_cols
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// Copy with rows reordered so that row `i` of the result is row
    /// `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let rows: Vec<&[f64]> = order.iter().map(|&i| self.row(i)).collect();
        Self::from_rows(&rows)
    }
}

/// Target interval of a min-max normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRange {
    pub lo: f64,
    pub hi: f64,
}

impl NormalizationRange {
    pub const UNIT: Self = Self { lo: 0.0, hi: 1.0 };
    pub const ANGLE: Self = Self {
        lo: 0.0,
        hi: std::f64::consts::PI,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!(
                "invalid normalization range [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn label(&self) -> String {
        if *self == Self::ANGLE {
            "[0, π]".to_string()
        } else {
            format!("[{}, {}]", self.lo, self.hi)
        }
    }
}

/// Squared Euclidean distance.
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_and_non_finite() {
        assert!(Dataset::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(Dataset::from_rows(&[vec![1.0, f64::INFINITY]]).is_err());
        assert!(Dataset::from_rows::<Vec<f64>>(&[]).is_err());
    }

    #[test]
    fn row_access() {
        let d = Dataset::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.column(0), vec![1.0, 3.0]);
        assert_eq!(d.permuted(&[1, 0]).unwrap().row(0), &[3.0, 4.0]);
    }
}
