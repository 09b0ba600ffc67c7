//! Even-nonzero partitioning.

use crate::matrix::CsrMatrix;

/// Nonzeros cut into fixed-size chunks regardless of row boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedPlan {
    /// Row of every nonzero (COO-expanded `row_ptr`).
    pub elem_row: Vec<usize>,
    pub chunk_size: usize,
    pub num_chunks: usize,
    /// `owned_rows[k]..owned_rows[k + 1]` are the rows whose first nonzero
    /// lies in chunk `k`. Length `num_chunks + 1`.
    pub owned_rows: Vec<usize>,
}

impl BalancedPlan {
    pub fn chunk_range(&self, k: usize) -> std::ops::Range<usize> {
        let start = k * self.chunk_size;
        start..(start + self.chunk_size).min(self.elem_row.len())
    }
}

/// Expands row ownership of every nonzero and cuts the nonzeros into chunks of
/// `chunk_size`. Empty rows contribute no elements.
///
/// # Panics
///
/// If `chunk_size` is zero.
pub fn plan_balanced<T>(a: &CsrMatrix<T>, chunk_size: usize) -> BalancedPlan {
    assert!(chunk_size >= 1, "chunk size must be positive");
    let row_ptr = a.row_ptr();
    let mut elem_row = Vec::with_capacity(a.nnz());
    for (i, w) in row_ptr.windows(2).enumerate() {
        elem_row.extend(std::iter::repeat_n(i, w[1] - w[0]));
    }
    let num_chunks = a.nnz().div_ceil(chunk_size);
    let heads = &row_ptr[..a.num_rows()];
    let owned_rows = (0..=num_chunks)
        .map(|k| heads.partition_point(|&p| p < k * chunk_size))
        .collect();
    BalancedPlan {
        elem_row,
        chunk_size,
        num_chunks,
        owned_rows,
    }
}
