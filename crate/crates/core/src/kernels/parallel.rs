//! Parallel-reduction kernels: lanes of a lane group share the nonzeros and
//! combine their partial sums through the reduction network. Each lane
//! multiplies its nonzero against a `C`-wide group of dense-row elements and
//! carries `C` partial sums (vector-type dense-row loading).

use rayon::prelude::*;

use super::plan::{plan_balanced, BalancedPlan};
use super::pool::with_workers;
use super::{merge_boundaries, owned_blocks, KernelConfig, KernelStats};
use crate::error::Result;
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::oracle::check_dims;
use crate::reduction::{for_each_segment_end, scan_lanes, tree_reduce, SENTINEL_ROW};
use crate::scalar::Scalar;

const ROW_GRAIN: usize = 32;
const CHUNK_GRAIN: usize = 16;

/// One lane group per row; lanes stride through the row `W` nonzeros at a
/// time, then a merge tree combines the lanes.
pub fn spmm_par_rowsplit<T: Scalar>(
    a: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    cfg: &KernelConfig,
) -> Result<DenseMatrix<T>> {
    par_rowsplit(a, x, cfg).map(|(y, _)| y)
}

/// Nonzeros cut into chunks of `W`; each chunk is one lane group reduced by
/// the segmented scan network.
pub fn spmm_par_balanced<T: Scalar>(
    a: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    cfg: &KernelConfig,
) -> Result<DenseMatrix<T>> {
    par_balanced(a, x, cfg).map(|(y, _)| y)
}

pub(super) fn par_rowsplit<T: Scalar>(
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
    let c = cfg.group_for(n);
    let stats = with_workers(cfg.worker_count, || {
        y.data_mut()
            .par_chunks_mut(n)
            .enumerate()
            .with_min_len(ROW_GRAIN)
            .map_init(
                || vec![T::zero(); w * 4],
                |lanes, (i, yrow)| match c {
                    1 => rowsplit_row::<T, 1>(a, x, i, w, lanes, yrow),
                    2 => rowsplit_row::<T, 2>(a, x, i, w, lanes, yrow),
                    _ => rowsplit_row::<T, 4>(a, x, i, w, lanes, yrow),
                },
            )
            .reduce(KernelStats::default, |l, r| l + r)
    });
    Ok((y, stats))
}

fn rowsplit_row<T: Scalar, const C: usize>(
    a: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    row: usize,
    w: usize,
    lanes: &mut [T],
    yrow: &mut [T],
) -> KernelStats {
    let range = a.row_range(row);
    if range.is_empty() {
        return KernelStats::default();
    }
    let n = yrow.len();
    let main = n / C * C;
    let mut stats = KernelStats {
        work_units: 1,
        ..Default::default()
    };
    for n0 in (0..main).step_by(C) {
        stats = stats + rowsplit_group::<T, C>(a, x, range.clone(), n0, w, lanes, &mut yrow[n0..n0 + C]);
    }
    for n0 in main..n {
        stats = stats + rowsplit_group::<T, 1>(a, x, range.clone(), n0, w, lanes, &mut yrow[n0..n0 + 1]);
    }
    stats
}

#[inline]
fn rowsplit_group<T: Scalar, const C: usize>(
    a: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    range: std::ops::Range<usize>,
    n0: usize,
    w: usize,
    buf: &mut [T],
    out: &mut [T],
) -> KernelStats {
    let lanes = buf[..w * C].as_chunks_mut::<C>().0;
    lanes.fill([T::zero(); C]);
    let (cols, vals) = (a.col_idx(), a.values());
    let (xd, n) = (x.data(), x.num_cols());
    let len = range.len();

    let mut e = range.start;
    while e < range.end {
        let stop = (e + w).min(range.end);
        for (lane, k) in lanes.iter_mut().zip(e..stop) {
            let av = vals[k];
            let xr = &xd[cols[k] * n + n0..][..C];
            for (acc, &xv) in lane.iter_mut().zip(xr) {
                *acc += av * xv;
            }
        }
        e = stop;
    }
    out.copy_from_slice(&tree_reduce(lanes));

    KernelStats {
        lane_slots: (len.div_ceil(w) * w * C) as u64,
        multiplies: (len * C) as u64,
        scan_adds: ((w - 1) * C) as u64,
        ..Default::default()
    }
}

struct ChunkScratch<T> {
    rows: Vec<usize>,
    lanes: Vec<T>,
}

type ChunkResult<T> = (Option<(usize, Vec<T>)>, KernelStats);

pub(super) fn par_balanced<T: Scalar>(
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
    let c = cfg.group_for(n);
    let plan = plan_balanced(a, w);

    let results: Vec<ChunkResult<T>> = {
        let blocks = owned_blocks(y.data_mut(), n, &plan);
        with_workers(cfg.worker_count, || {
            blocks
                .into_par_iter()
                .enumerate()
                .with_min_len(CHUNK_GRAIN)
                .map_init(
                    || ChunkScratch {
                        rows: vec![SENTINEL_ROW; w],
                        lanes: vec![T::zero(); w * 4],
                    },
                    |scratch, (k, block)| balanced_chunk(a, x, &plan, k, c, scratch, block),
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
    c: usize,
    scratch: &mut ChunkScratch<T>,
    block: &mut [T],
) -> ChunkResult<T> {
    let range = plan.chunk_range(k);
    let owner_start = plan.owned_rows[k];
    let n = x.num_cols();

    let rows = &mut scratch.rows;
    rows[..range.len()].copy_from_slice(&plan.elem_row[range.clone()]);
    rows[range.len()..].fill(SENTINEL_ROW);

    // The chunk's first row started in an earlier chunk: its partial goes to
    // the serial merge instead of `block`.
    let mut head = (rows[0] < owner_start).then(|| vec![T::zero(); n]);
    let mut stats = KernelStats {
        work_units: 1,
        boundary_partials: head.is_some() as u64,
        ..Default::default()
    };

    let mut group = |n0: usize, width: usize| {
        let mut out = ChunkOut {
            owner_start,
            n,
            n0,
            head: head.as_deref_mut(),
            block: &mut *block,
        };
        match width {
            1 => balanced_group::<T, 1>(a, x, range.clone(), rows, &mut scratch.lanes, &mut out),
            2 => balanced_group::<T, 2>(a, x, range.clone(), rows, &mut scratch.lanes, &mut out),
            _ => balanced_group::<T, 4>(a, x, range.clone(), rows, &mut scratch.lanes, &mut out),
        }
    };
    let main = n / c * c;
    for n0 in (0..main).step_by(c) {
        stats = stats + group(n0, c);
    }
    for n0 in main..n {
        stats = stats + group(n0, 1);
    }

    (head.map(|h| (plan.elem_row[range.start], h)), stats)
}

struct ChunkOut<'a, T> {
    owner_start: usize,
    n: usize,
    n0: usize,
    head: Option<&'a mut [T]>,
    block: &'a mut [T],
}

#[inline]
fn balanced_group<T: Scalar, const C: usize>(
    a: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    range: std::ops::Range<usize>,
    rows: &[usize],
    buf: &mut [T],
    out: &mut ChunkOut<'_, T>,
) -> KernelStats {
    let w = rows.len();
    let lanes = buf[..w * C].as_chunks_mut::<C>().0;
    let (cols, vals) = (a.col_idx(), a.values());
    let (xd, n) = (x.data(), x.num_cols());
    let n0 = out.n0;

    let active = range.len();
    for (lane, e) in lanes.iter_mut().zip(range) {
        let av = vals[e];
        let xr = &xd[cols[e] * n + n0..][..C];
        for (v, &xv) in lane.iter_mut().zip(xr) {
            *v = av * xv;
        }
    }
    lanes[active..].fill([T::zero(); C]);

    let fired = scan_lanes(rows, lanes);

    for_each_segment_end(rows, |lane, row| {
        let dst = if row < out.owner_start {
            &mut out.head.as_deref_mut().expect("head partial allocated")[n0..n0 + C]
        } else {
            let r = row - out.owner_start;
            &mut out.block[r * out.n + n0..r * out.n + n0 + C]
        };
        dst.copy_from_slice(&lanes[lane]);
    });

    KernelStats {
        lane_slots: (w * C) as u64,
        multiplies: (active * C) as u64,
        scan_adds: fired,
        ..Default::default()
    }
}
