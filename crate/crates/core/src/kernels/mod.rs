//! The four SpMV/SpMM kernel families.
//!
//! | | row split | nonzero split |
//! |---|---|---|
//! | parallel reduction | [`spmm_par_rowsplit`] | [`spmm_par_balanced`] |
//! | sequential reduction | [`spmm_seq_rowsplit`] | [`spmm_seq_balanced`] |
//!
//! Every kernel zero-initializes `Y`, writes disjoint complete rows from the
//! workers, and (for the nonzero-split kernels) folds the partial sums of rows
//! that straddle chunk boundaries into `Y` serially, in ascending chunk order,
//! once all workers are done. Output therefore does not depend on the worker
//! count.

mod parallel;
mod plan;
mod pool;
mod sequential;

use std::fmt;
use std::str::FromStr;

pub use parallel::{spmm_par_balanced, spmm_par_rowsplit};
pub use plan::{plan_balanced, BalancedPlan};
pub use pool::default_workers;
pub use sequential::{spmm_seq_balanced, spmm_seq_rowsplit};

use crate::error::{Error, Result};
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::reduction::is_valid_lane_width;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Reduction {
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Balancing {
    RowSplit,
    NonzeroSplit,
}

/// One point of the reduction × balancing design space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelId {
    ParRowSplit,
    ParBalanced,
    SeqRowSplit,
    SeqBalanced,
}

impl KernelId {
    pub const ALL: [KernelId; 4] = [
        KernelId::ParRowSplit,
        KernelId::ParBalanced,
        KernelId::SeqRowSplit,
        KernelId::SeqBalanced,
    ];

    pub fn new(reduction: Reduction, balancing: Balancing) -> Self {
        match (reduction, balancing) {
            (Reduction::Parallel, Balancing::RowSplit) => KernelId::ParRowSplit,
            (Reduction::Parallel, Balancing::NonzeroSplit) => KernelId::ParBalanced,
            (Reduction::Sequential, Balancing::RowSplit) => KernelId::SeqRowSplit,
            (Reduction::Sequential, Balancing::NonzeroSplit) => KernelId::SeqBalanced,
        }
    }

    pub fn reduction(self) -> Reduction {
        match self {
            KernelId::ParRowSplit | KernelId::ParBalanced => Reduction::Parallel,
            KernelId::SeqRowSplit | KernelId::SeqBalanced => Reduction::Sequential,
        }
    }

    pub fn balancing(self) -> Balancing {
        match self {
            KernelId::ParRowSplit | KernelId::SeqRowSplit => Balancing::RowSplit,
            KernelId::ParBalanced | KernelId::SeqBalanced => Balancing::NonzeroSplit,
        }
    }

    /// Short name used on the command line and in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            KernelId::ParRowSplit => "par-rs",
            KernelId::ParBalanced => "par-ws",
            KernelId::SeqRowSplit => "seq-rs",
            KernelId::SeqBalanced => "seq-ws",
        }
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelId::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownKernel(s.to_string()))
    }
}

/// Tunables that a GPU implementation would get from the hardware.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelConfig {
    /// Lanes per lane group (the warp-size analog).
    pub lane_width: usize,
    /// Dense columns handled per lane in the parallel-reduction kernels.
    /// `None` picks the largest of 4, 2, 1 dividing `N`.
    pub vdl_group: Option<usize>,
    /// Nonzeros per unit of work in the sequential nonzero-split kernel.
    pub seq_chunk: usize,
    pub worker_count: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            lane_width: 32,
            vdl_group: None,
            seq_chunk: 256,
            worker_count: default_workers(),
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if !is_valid_lane_width(self.lane_width) {
            return Err(Error::InvalidConfig(format!(
                "lane width {} must be a power of two in [2, 64]",
                self.lane_width
            )));
        }
        if let Some(c) = self.vdl_group {
            if !matches!(c, 1 | 2 | 4) {
                return Err(Error::InvalidGroupWidth(c));
            }
        }
        if self.seq_chunk == 0 {
            return Err(Error::InvalidConfig("seq_chunk must be positive".into()));
        }
        if self.worker_count == 0 {
            return Err(Error::InvalidConfig("worker_count must be positive".into()));
        }
        Ok(())
    }

    /// Column-group width used for `n` dense columns.
    pub fn group_for(&self, n: usize) -> usize {
        self.vdl_group
            .unwrap_or_else(|| [4, 2, 1].into_iter().find(|&c| n.is_multiple_of(c)).unwrap_or(1))
    }
}

/// Operation counts gathered during one kernel run.
///
/// Counts are in scalar component operations: a lane handling a `C`-wide
/// column group contributes `C` per multiply or add.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KernelStats {
    /// Lane positions occupied, whether or not they held a nonzero.
    pub lane_slots: u64,
    /// Useful nonzero × dense-element multiplies.
    pub multiplies: u64,
    /// Adds performed by the reduction network.
    pub scan_adds: u64,
    /// Partial row sums routed through the serial boundary merge.
    pub boundary_partials: u64,
    /// Units of work (rows or chunks) processed.
    pub work_units: u64,
}

impl std::ops::Add for KernelStats {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            lane_slots: self.lane_slots + o.lane_slots,
            multiplies: self.multiplies + o.multiplies,
            scan_adds: self.scan_adds + o.scan_adds,
            boundary_partials: self.boundary_partials + o.boundary_partials,
            work_units: self.work_units + o.work_units,
        }
    }
}

/// Runs kernel `kernel` and returns `Y = A X`.
pub fn spmm<T: Scalar>(
    kernel: KernelId,
    a: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    cfg: &KernelConfig,
) -> Result<DenseMatrix<T>> {
    spmm_with_stats(kernel, a, x, cfg).map(|(y, _)| y)
}

pub fn spmm_with_stats<T: Scalar>(
    kernel: KernelId,
    a: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    cfg: &KernelConfig,
) -> Result<(DenseMatrix<T>, KernelStats)> {
    match kernel {
        KernelId::ParRowSplit => parallel::par_rowsplit(a, x, cfg),
        KernelId::ParBalanced => parallel::par_balanced(a, x, cfg),
        KernelId::SeqRowSplit => sequential::seq_rowsplit(a, x, cfg),
        KernelId::SeqBalanced => sequential::seq_balanced(a, x, cfg),
    }
}

/// Splits `y` (row-major, `n` columns) into one mutable block per chunk of
/// `plan`, covering the rows each chunk owns.
fn owned_blocks<'a, T>(y: &'a mut [T], n: usize, plan: &BalancedPlan) -> Vec<&'a mut [T]> {
    let mut blocks = Vec::with_capacity(plan.num_chunks);
    let mut rest = y;
    for k in 0..plan.num_chunks {
        let rows = plan.owned_rows[k + 1] - plan.owned_rows[k];
        let (head, tail) = rest.split_at_mut(rows * n);
        blocks.push(head);
        rest = tail;
    }
    blocks
}

/// Serially adds each chunk's leading partial row into `y`, in chunk order.
fn merge_boundaries<T: Scalar>(y: &mut [T], n: usize, heads: Vec<Option<(usize, Vec<T>)>>) {
    for (row, partial) in heads.into_iter().flatten() {
        for (d, s) in y[row * n..(row + 1) * n].iter_mut().zip(partial) {
            *d += s;
        }
    }
}
