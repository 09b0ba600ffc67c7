//! Sparse (CSR) and dense (row-major) operands.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sparse matrix in compressed sparse row layout.
///
/// Always canonical: column indices strictly increase within each row, so no
/// duplicate entries exist. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    num_rows: usize,
    num_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds a matrix from raw CSR arrays, checking every structural invariant.
    pub fn new(
        num_rows: usize,
        num_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<T>,
    ) -> Result<Self> {
        if row_ptr.len() != num_rows + 1 {
            return Err(Error::InvalidCsr(format!(
                "row_ptr has length {}, expected {}",
                row_ptr.len(),
                num_rows + 1
            )));
        }
        if row_ptr[0] != 0 {
            return Err(Error::InvalidCsr("row_ptr[0] must be 0".into()));
        }
        if col_idx.len() != values.len() {
            return Err(Error::InvalidCsr(format!(
                "{} column indices but {} values",
                col_idx.len(),
                values.len()
            )));
        }
        if row_ptr[num_rows] != col_idx.len() {
            return Err(Error::InvalidCsr(format!(
                "row_ptr[{num_rows}] = {} but nnz = {}",
                row_ptr[num_rows],
                col_idx.len()
            )));
        }
        if let Some(i) = row_ptr.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidCsr(format!("row_ptr decreases at row {i}")));
        }
        for i in 0..num_rows {
            let (start, end) = (row_ptr[i], row_ptr[i + 1]);
            let cols = &col_idx[start..end];
            if let Some(&c) = cols.iter().find(|&&c| c >= num_cols) {
                return Err(Error::InvalidCsr(format!("row {i} has column {c} >= {num_cols}")));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidCsr(format!(
                    "row {i} columns are not strictly increasing"
                )));
            }
        }
        Ok(Self {
            num_rows,
            num_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// All-zero matrix.
    pub fn zeros(num_rows: usize, num_cols: usize) -> Self {
        Self {
            num_rows,
            num_cols,
            row_ptr: vec![0; num_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            num_rows: n,
            num_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    /// Builds a canonical matrix from `(row, col, value)` triples.
    ///
    /// Entries are sorted per row and duplicate coordinates are summed in
    /// input order. An out-of-range triple is reported by its position.
    pub fn from_coo(triples: &[(usize, usize, T)], num_rows: usize, num_cols: usize) -> Result<Self> {
        for (position, &(row, col, _)) in triples.iter().enumerate() {
            if row >= num_rows || col >= num_cols {
                return Err(Error::IndexOutOfBounds {
                    position,
                    row,
                    col,
                    num_rows,
                    num_cols,
                });
            }
        }

        // Counting sort by row keeps input order within a row, so the stable
        // column sort below sums duplicates in the order they were given.
        let mut counts = vec![0usize; num_rows + 1];
        for &(row, _, _) in triples {
            counts[row + 1] += 1;
        }
        for i in 0..num_rows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut staged: Vec<(usize, T)> = vec![(0, T::zero()); triples.len()];
        for &(row, col, v) in triples {
            staged[next[row]] = (col, v);
            next[row] += 1;
        }

        let mut row_ptr = Vec::with_capacity(num_rows + 1);
        let mut col_idx = Vec::with_capacity(triples.len());
        let mut values = Vec::with_capacity(triples.len());
        row_ptr.push(0);
        for i in 0..num_rows {
            let row = &mut staged[counts[i]..counts[i + 1]];
            row.sort_by_key(|&(c, _)| c);
            for &(c, v) in row.iter() {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }

        Ok(Self {
            num_rows,
            num_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Re-expands the matrix into row-major `(row, col, value)` triples.
    pub fn to_coo(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.num_rows {
            for e in self.row_range(i) {
                out.push((i, self.col_idx[e], self.values[e]));
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let triples: Vec<_> = self.to_coo().into_iter().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_coo(&triples, self.num_cols, self.num_rows).expect("transpose of a valid matrix")
    }

    /// Same structure with every value replaced by `f(value)`.
    pub fn map_values<U: Scalar>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            num_rows: self.num_rows,
            num_cols: self.num_cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Converts the element type through `f64`.
    pub fn cast<U: Scalar>(&self) -> CsrMatrix<U> {
        self.map_values(|v| U::from_f64_lossy(v.to_f64_lossless()))
    }
}

impl<T> CsrMatrix<T> {
    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn row_range(&self, row: usize) -> std::ops::Range<usize> {
        self.row_ptr[row]..self.row_ptr[row + 1]
    }

    #[inline]
    pub fn row_len(&self, row: usize) -> usize {
        self.row_ptr[row + 1] - self.row_ptr[row]
    }

    pub fn row_lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.row_ptr.windows(2).map(|w| w[1] - w[0])
    }

    pub fn max_row_nnz(&self) -> usize {
        self.row_lengths().max().unwrap_or(0)
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    num_rows: usize,
    num_cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn new(num_rows: usize, num_cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != num_rows * num_cols {
            return Err(Error::InvalidDense {
                rows: num_rows,
                cols: num_cols,
                len: data.len(),
            });
        }
        Ok(Self {
            num_rows,
            num_cols,
            data,
        })
    }

    pub fn zeros(num_rows: usize, num_cols: usize) -> Self {
        Self {
            num_rows,
            num_cols,
            data: vec![T::zero(); num_rows * num_cols],
        }
    }

    pub fn from_fn(num_rows: usize, num_cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(num_rows * num_cols);
        for i in 0..num_rows {
            for j in 0..num_cols {
                data.push(f(i, j));
            }
        }
        Self {
            num_rows,
            num_cols,
            data,
        }
    }

    pub fn cast<U: Scalar>(&self) -> DenseMatrix<U> {
        DenseMatrix {
            num_rows: self.num_rows,
            num_cols: self.num_cols,
            data: self
                .data
                .iter()
                .map(|&v| U::from_f64_lossy(v.to_f64_lossless()))
                .collect(),
        }
    }
}

impl<T> DenseMatrix<T> {
    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.num_cols..(i + 1) * self.num_cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.num_cols + j]
    }
}
