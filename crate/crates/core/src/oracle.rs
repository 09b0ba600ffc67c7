//! Single-threaded 64-bit reference product.

use crate::error::{Error, Result};
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::scalar::Scalar;

pub(crate) fn check_dims<T, U>(a: &CsrMatrix<T>, x: &DenseMatrix<U>) -> Result<()> {
    if a.num_cols() != x.num_rows() {
        return Err(Error::DimensionMismatch {
            a_rows: a.num_rows(),
            a_cols: a.num_cols(),
            x_rows: x.num_rows(),
            x_cols: x.num_cols(),
        });
    }
    Ok(())
}

/// Ground-truth `Y = A X`, accumulated in `f64` in ascending nonzero order.
pub fn oracle_spmm<T: Scalar>(a: &CsrMatrix<T>, x: &DenseMatrix<T>) -> Result<DenseMatrix<f64>> {
    reference_product(a, x, |v| v)
}

/// `|A| |X|` in `f64`: the magnitude that bounds rounding error of any
/// summation order for each output entry.
pub fn oracle_abs_spmm<T: Scalar>(a: &CsrMatrix<T>, x: &DenseMatrix<T>) -> Result<DenseMatrix<f64>> {
    reference_product(a, x, f64::abs)
}

fn reference_product<T: Scalar>(
    a: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    f: impl Fn(f64) -> f64,
) -> Result<DenseMatrix<f64>> {
    check_dims(a, x)?;
    let n = x.num_cols();
    let mut y = vec![0.0f64; a.num_rows() * n];
    for i in 0..a.num_rows() {
        let out = &mut y[i * n..(i + 1) * n];
        for e in a.row_range(i) {
            let av = f(a.values()[e].to_f64_lossless());
            let xr = x.row(a.col_idx()[e]);
            for (o, &xv) in out.iter_mut().zip(xr) {
                *o += av * f(xv.to_f64_lossless());
            }
        }
    }
    DenseMatrix::new(a.num_rows(), n, y)
}

/// Largest scaled error `|y - oracle| / (tol · |A||X|)` over all entries;
/// `<= 1` means the kernel output is within tolerance.
///
/// `tol = eps · log2(max_row_nnz + 2)` with `eps` the element-width epsilon.
/// Entries whose magnitude bound is zero must match exactly.
pub fn tolerance_ratio<T: Scalar>(
    y: &DenseMatrix<T>,
    oracle: &DenseMatrix<f64>,
    magnitude: &DenseMatrix<f64>,
    max_row_nnz: usize,
) -> f64 {
    let tol = T::KERNEL_EPS * ((max_row_nnz + 2) as f64).log2();
    let mut worst = 0.0f64;
    for ((&got, &want), &mag) in y.data().iter().zip(oracle.data()).zip(magnitude.data()) {
        let err = (got.to_f64_lossless() - want).abs();
        let ratio = if mag == 0.0 {
            if err == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            err / (tol * mag)
        };
        if ratio > worst || ratio.is_nan() {
            worst = ratio;
        }
    }
    if y.data().len() != oracle.data().len() {
        return f64::INFINITY;
    }
    worst
}
