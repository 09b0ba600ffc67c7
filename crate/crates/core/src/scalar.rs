//! Element types the kernels are generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};

/// Real element type of a sparse or dense operand.
///
/// Implemented for `f32` and `f64`. The tolerances attached to each width are
/// the per-width epsilons used when comparing kernel output against the
/// 64-bit reference product.
pub trait Scalar:
    Float + FromPrimitive + AddAssign + MulAssign + Sum + Default + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Storage width in bits.
    const BITS: u32;

    /// Base relative tolerance for kernel-vs-reference comparisons. Scaled by
    /// `log2(max_row_nnz + 2)` at the call site.
    const KERNEL_EPS: f64;

    /// Relative tolerance for a single lane-chunk reduction on random reals.
    const REDUCTION_EPS: f64;

    fn from_f64_lossy(v: f64) -> Self;

    fn to_f64_lossless(self) -> f64;
}

macro_rules! impl_scalar {
    ($t:ty, $bits:expr, $keps:expr, $reps:expr) => {
        impl Scalar for $t {
            const BITS: u32 = $bits;
            const KERNEL_EPS: f64 = $keps;
            const REDUCTION_EPS: f64 = $reps;

            #[inline(always)]
            fn from_f64_lossy(v: f64) -> Self {
                v as $t
            }

            #[inline(always)]
            fn to_f64_lossless(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_scalar!(f32, 32, 1e-5, 1e-6);
impl_scalar!(f64, 64, 1e-12, 1e-13);
