//! Row-length statistics that drive kernel selection.

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;

/// Row-length distribution summary of a sparse matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixFeatures {
    /// Mean nonzeros per row.
    pub avg_row: f64,
    /// Population standard deviation of the row lengths.
    pub stdv_row: f64,
    /// `stdv_row / avg_row`, or 0 when every row is empty.
    pub cv: f64,
    pub num_rows: usize,
    pub nnz: usize,
}

impl MatrixFeatures {
    pub fn from_row_lengths(lengths: &[usize]) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::NoRows);
        }
        let m = lengths.len() as f64;
        let nnz: usize = lengths.iter().sum();
        let avg_row = nnz as f64 / m;
        let var = lengths
            .iter()
            .map(|&l| {
                let d = l as f64 - avg_row;
                d * d
            })
            .sum::<f64>()
            / m;
        let stdv_row = var.sqrt();
        let cv = if avg_row == 0.0 { 0.0 } else { stdv_row / avg_row };
        Ok(Self {
            avg_row,
            stdv_row,
            cv,
            num_rows: lengths.len(),
            nnz,
        })
    }

    /// Builds features from explicit statistics, e.g. for selector experiments.
    pub fn from_stats(avg_row: f64, cv: f64) -> Self {
        Self {
            avg_row,
            stdv_row: avg_row * cv,
            cv,
            num_rows: 0,
            nnz: 0,
        }
    }
}

/// Computes [`MatrixFeatures`] over the row lengths of `a`.
pub fn extract_features<T>(a: &CsrMatrix<T>) -> Result<MatrixFeatures> {
    let lengths: Vec<usize> = a.row_lengths().collect();
    MatrixFeatures::from_row_lengths(&lengths)
}
