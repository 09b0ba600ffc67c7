//! Sequential-reduction kernels with coalesced sparse-row caching.
//!
//! Nonzeros are first staged, `W` at a time, into a small per-worker tile
//! (the scratchpad analog), then the tile is swept in order while every dense
//! column accumulates into its own running sum. Accumulation per output entry
//! is in ascending nonzero order.

use rayon::prelude::*;

use super::plan::{plan_balanced, BalancedPlan};
use super::pool::with_workers;
use super::{merge_boundaries, owned_blocks, KernelConfig, KernelStats};
use crate::error::Result;
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::oracle::check_dims;
use crate::scalar::Scalar;

const ROW_GRAIN: usize = 32;

/// Partial sum for a row that began in an earlier chunk.
type Head<T> = Option<(usize, Vec<T>)>;

pub fn spmm_seq_rowsplit<T: Scalar>(
    a: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    cfg: &KernelConfig,
) -> Result<DenseMatrix<T>> {
    seq_rowsplit(a, x, cfg).map(|(y, _)| y)
}

pub fn spmm_seq_balanced<T: Scalar>(
    a: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    cfg: &KernelConfig,
) -> Result<DenseMatrix<T>> {
    seq_balanced(a, x, cfg).map(|(y, _)| y)
}

/// Stages `cols/vals[range]` tile by tile and feeds each staged entry to `f`.
/// Returns the number of tiles.
#[inline]
fn sweep_tiles<T: Scalar>(
    cols: &[usize],
    vals: &[T],
    range: std::ops::Range<usize>,
    tile: &mut [(usize, T)],
    mut f: impl FnMut(usize, usize, T),
) -> u64 {
    let w = tile.len();
    let mut tiles = 0;
    let mut e = range.start;
    while e < range.end {
        let stop = (e + w).min(range.end);
        let staged = &mut tile[..stop - e];
        for (slot, k) in staged.iter_mut().zip(e..stop) {
            *slot = (cols[k], vals[k]);
        }
        for (off, &(col, v)) in staged.iter().enumerate() {
            f(e + off, col, v);
        }
        tiles += 1;
        e = stop;
    }
    tiles
}

#[inline]
fn axpy<T: Scalar>(acc: &mut [T], v: T, xr: &[T]) {
    for (d, &xv) in acc.iter_mut().zip(xr) {
        *d += v * xv;
    }
}

pub(super) fn seq_rowsplit<T: Scalar>(
    a: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    cfg: &KernelConfig,
) -> Result<(DenseMatrix<T>, KernelStats)> {
    check_dims(a, x)?;
    cfg.validate()?;
    let n = x.num_cols();
    let mut y = DenseMatrix::zeros(a.num_rows(), n);
    if n == 0 || a.nnz() == 0 {
        return Ok((y, KernelStats::default()));
    }
    let w = cfg.lane_width;
    let (cols, vals) = (a.col_idx(), a.values());
    let xd = x.data();

    let stats = with_workers(cfg.worker_count, || {
        y.data_mut()
            .par_chunks_mut(n)
            .enumerate()
            .with_min_len(ROW_GRAIN)
            .map_init(
                || vec![(0usize, T::zero()); w],
                |tile, (i, yrow)| {
                    let range = a.row_range(i);
                    if range.is_empty() {
                        return KernelStats::default();
                    }
                    let len = range.len() as u64;
                    let tiles = sweep_tiles(cols, vals, range, tile, |_, col, v| {
                        axpy(yrow, v, &xd[col * n..(col + 1) * n]);
                    });
                    KernelStats {
                        lane_slots: tiles * w as u64,
                        multiplies: len * n as u64,
                        work_units: 1,
                        ..Default::default()
                    }
                },
            )
            .reduce(KernelStats::default, |l, r| l + r)
    });
    Ok((y, stats))
}

pub(super) fn seq_balanced<T: Scalar>(
    a: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    cfg: &KernelConfig,
) -> Result<(DenseMatrix<T>, KernelStats)> {
    check_dims(a, x)?;
    cfg.validate()?;
    let n = x.num_cols();
    let mut y = DenseMatrix::zeros(a.num_rows(), n);
    if n == 0 || a.nnz() == 0 {
        return Ok((y, KernelStats::default()));
    }
    let w = cfg.lane_width;
    let plan = plan_balanced(a, cfg.seq_chunk);

    let results: Vec<(Head<T>, KernelStats)> = {
        let blocks = owned_blocks(y.data_mut(), n, &plan);
        with_workers(cfg.worker_count, || {
            blocks
                .into_par_iter()
                .enumerate()
                .map_init(
                    || (vec![(0usize, T::zero()); w], vec![T::zero(); n]),
                    |(tile, acc), (k, block)| balanced_chunk(a, x, &plan, k, tile, acc, block),
                )
                .collect()
        })
    };

    let mut stats = KernelStats::default();
    let mut heads = Vec::with_capacity(results.len());
    for (head, s) in results {
        stats = stats + s;
        heads.push(head);
    }
    merge_boundaries(y.data_mut(), n, heads);
    Ok((y, stats))
}

fn balanced_chunk<T: Scalar>(
    a: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    plan: &BalancedPlan,
    k: usize,
    tile: &mut [(usize, T)],
    acc: &mut [T],
    block: &mut [T],
) -> (Head<T>, KernelStats) {
    let range = plan.chunk_range(k);
    let owner_start = plan.owned_rows[k];
    let n = x.num_cols();
    let xd = x.data();
    let len = range.len() as u64;

    let mut head = None;
    let mut current = plan.elem_row[range.start];
    acc.fill(T::zero());

    // Rows below `owner_start` began in an earlier chunk; only the first row
    // of a chunk can be one.
    let mut flush = |row: usize, acc: &mut [T]| {
        if row < owner_start {
            head = Some((row, acc.to_vec()));
        } else {
            let r = row - owner_start;
            block[r * n..(r + 1) * n].copy_from_slice(acc);
        }
        acc.fill(T::zero());
    };

    let tiles = sweep_tiles(a.col_idx(), a.values(), range, tile, |e, col, v| {
        let row = plan.elem_row[e];
        if row != current {
            flush(current, acc);
            current = row;
        }
        axpy(acc, v, &xd[col * n..(col + 1) * n]);
    });
    flush(current, acc);

    let stats = KernelStats {
        lane_slots: tiles * tile.len() as u64,
        multiplies: len * n as u64,
        boundary_partials: head.is_some() as u64,
        work_units: 1,
        ..Default::default()
    };
    (head, stats)
}
