//! CPU sparse-times-dense kernels built from two design principles:
//! workload balancing (even nonzero partitioning versus one row per unit) and
//! parallel reduction (lanes cooperatively reducing a row versus one unit
//! accumulating serially). The four combinations live in [`kernels`];
//! [`selector`] picks one from cheap row-length features and the dense width.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below name the common instantiations.
//!
//! ```
//! use spkernels::{extract_features, select_kernel, spmm, CsrMatrixF64, DenseMatrixF64, KernelConfig, SelectorThresholds};
//!
//! let a = CsrMatrixF64::from_coo(&[(0, 0, 1.0), (1, 0, 2.0), (1, 1, 3.0)], 2, 2)?;
//! let x = DenseMatrixF64::new(2, 2, vec![10.0, 1.0, 20.0, 2.0])?;
//! let kernel = select_kernel(&extract_features(&a)?, x.num_cols(), &SelectorThresholds::default());
//! let y = spmm(kernel, &a, &x, &KernelConfig::default())?;
//! assert_eq!(y.data(), &[10.0, 1.0, 80.0, 8.0]);
//! # Ok::<(), spkernels::Error>(())
//! ```

pub mod bench;
pub mod error;
pub mod features;
pub mod io;
pub mod kernels;
pub mod matrix;
pub mod oracle;
pub mod reduction;
pub mod rmat;
pub mod scalar;
pub mod selector;

pub use error::{Error, Result};
pub use features::{extract_features, MatrixFeatures};
pub use kernels::{
    plan_balanced, spmm, spmm_par_balanced, spmm_par_rowsplit, spmm_seq_balanced, spmm_seq_rowsplit, spmm_with_stats,
    BalancedPlan, Balancing, KernelConfig, KernelId, KernelStats, Reduction,
};
pub use matrix::{CsrMatrix, DenseMatrix};
pub use oracle::{oracle_abs_spmm, oracle_spmm, tolerance_ratio};
pub use reduction::{conditional_scan, segment_reduce_chunk, segment_reduce_chunk_vec, LaneChunk, SegmentOutput};
pub use scalar::Scalar;
pub use selector::{calibrate_thresholds, select_kernel, SelectorThresholds};

pub type CsrMatrixF32 = CsrMatrix<f32>;
pub type CsrMatrixF64 = CsrMatrix<f64>;
pub type DenseMatrixF32 = DenseMatrix<f32>;
pub type DenseMatrixF64 = DenseMatrix<f64>;
pub type LaneChunkF32 = LaneChunk<f32>;
pub type LaneChunkF64 = LaneChunk<f64>;
