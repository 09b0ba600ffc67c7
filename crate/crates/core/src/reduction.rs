//! Lane-model segmented reduction.
//!
//! A chunk of `W` lanes, each holding a row index and a value (or a `C`-wide
//! vector of values, one per dense column in a group), is reduced by a
//! Hillis-Steele style scan network whose add only fires when the two lanes
//! carry the same row index. After the network, the last lane of every run of
//! equal row indices holds that run's total, and those lanes are dumped.
//!
//! The network runs in lockstep: at each level every lane reads its partner's
//! value from before the level, then writes. The in-place implementation
//! visits lanes from high to low so a partner (always at a lower lane) is
//! never overwritten before it is read.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row index carried by padding lanes. Never emitted.
pub const SENTINEL_ROW: usize = usize::MAX;

pub const MIN_LANE_WIDTH: usize = 2;
pub const MAX_LANE_WIDTH: usize = 64;

pub fn is_valid_lane_width(w: usize) -> bool {
    w.is_power_of_two() && (MIN_LANE_WIDTH..=MAX_LANE_WIDTH).contains(&w)
}

pub fn is_valid_group(c: usize) -> bool {
    matches!(c, 1 | 2 | 4)
}

/// One lane group's worth of (row index, value) pairs.
///
/// Values are lane-major: lane `i` owns `values[i * group..(i + 1) * group]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneChunk<T> {
    row_idx: Vec<usize>,
    values: Vec<T>,
    group: usize,
}

impl<T: Scalar> LaneChunk<T> {
    /// Scalar chunk; the width is `row_idx.len()`.
    pub fn new(row_idx: Vec<usize>, values: Vec<T>) -> Result<Self> {
        Self::with_group(row_idx, values, 1)
    }

    /// Vectorized chunk carrying `group` values per lane.
    pub fn with_group(row_idx: Vec<usize>, values: Vec<T>, group: usize) -> Result<Self> {
        let w = row_idx.len();
        if !is_valid_lane_width(w) {
            return Err(Error::InvalidChunk(format!(
                "width {w} is not a power of two in [{MIN_LANE_WIDTH}, {MAX_LANE_WIDTH}]"
            )));
        }
        if !is_valid_group(group) {
            return Err(Error::InvalidGroupWidth(group));
        }
        if values.len() != w * group {
            return Err(Error::InvalidChunk(format!(
                "{} values for {w} lanes of width {group}",
                values.len()
            )));
        }
        if row_idx.windows(2).any(|p| p[1] < p[0]) {
            return Err(Error::InvalidChunk("row indices decrease".into()));
        }
        Ok(Self { row_idx, values, group })
    }

    /// Pads a short tail chunk out to `width` lanes with sentinel rows and zeros.
    pub fn padded(width: usize, mut row_idx: Vec<usize>, mut values: Vec<T>, group: usize) -> Result<Self> {
        if row_idx.len() > width {
            return Err(Error::InvalidChunk(format!(
                "{} lanes do not fit in width {width}",
                row_idx.len()
            )));
        }
        row_idx.resize(width, SENTINEL_ROW);
        values.resize(width * group, T::zero());
        Self::with_group(row_idx, values, group)
    }

    pub fn width(&self) -> usize {
        self.row_idx.len()
    }

    pub fn group(&self) -> usize {
        self.group
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn lane(&self, i: usize) -> &[T] {
        &self.values[i * self.group..(i + 1) * self.group]
    }
}

/// Per-row results dumped from one chunk, in ascending row order.
///
/// The first entry may be only part of a row that began in an earlier chunk,
/// and the last entry may be only part of a row that continues into the next
/// chunk. Whether either actually straddles a boundary depends on the global
/// row extents, which only the caller knows; [`SegmentOutput::boundary_head`]
/// and [`SegmentOutput::boundary_tail`] expose the two candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentOutput<T> {
    group: usize,
    rows: Vec<usize>,
    partials: Vec<T>,
}

impl<T: Scalar> SegmentOutput<T> {
    pub fn group(&self) -> usize {
        self.group
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn entry(&self, k: usize) -> (usize, &[T]) {
        (self.rows[k], &self.partials[k * self.group..(k + 1) * self.group])
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, &[T])> + '_ {
        (0..self.len()).map(move |k| self.entry(k))
    }

    /// Entry for the chunk's first row.
    pub fn boundary_head(&self) -> Option<(usize, &[T])> {
        (!self.is_empty()).then(|| self.entry(0))
    }

    /// Entry for the chunk's last row.
    pub fn boundary_tail(&self) -> Option<(usize, &[T])> {
        (!self.is_empty()).then(|| self.entry(self.len() - 1))
    }
}

/// Conditional inclusive scan, applied to every component of each lane.
pub fn conditional_scan<T: Scalar>(chunk: &LaneChunk<T>) -> LaneChunk<T> {
    let mut out = chunk.clone();
    scan_dyn(&out.row_idx, &mut out.values, out.group);
    out
}

/// Runs the scan network and dumps one entry per distinct (non-padding) row.
pub fn segment_reduce_chunk<T: Scalar>(chunk: &LaneChunk<T>) -> SegmentOutput<T> {
    let scanned = conditional_scan(chunk);
    let c = scanned.group;
    let mut rows = Vec::new();
    let mut partials = Vec::new();
    for_each_segment_end(&scanned.row_idx, |lane, row| {
        rows.push(row);
        partials.extend_from_slice(&scanned.values[lane * c..(lane + 1) * c]);
    });
    SegmentOutput {
        group: c,
        rows,
        partials,
    }
}

/// [`segment_reduce_chunk`] with an explicit column-group width `c`, which
/// must match the chunk's layout.
pub fn segment_reduce_chunk_vec<T: Scalar>(chunk: &LaneChunk<T>, c: usize) -> Result<SegmentOutput<T>> {
    if !is_valid_group(c) {
        return Err(Error::InvalidGroupWidth(c));
    }
    if chunk.group != c {
        return Err(Error::InvalidChunk(format!(
            "chunk carries {} values per lane, requested {c}",
            chunk.group
        )));
    }
    Ok(segment_reduce_chunk(chunk))
}

fn scan_dyn<T: Scalar>(rows: &[usize], values: &mut [T], c: usize) {
    match c {
        1 => scan_lanes::<T, 1>(rows, values.as_chunks_mut::<1>().0),
        2 => scan_lanes::<T, 2>(rows, values.as_chunks_mut::<2>().0),
        4 => scan_lanes::<T, 4>(rows, values.as_chunks_mut::<4>().0),
        _ => unreachable!("group width validated at construction"),
    };
}

/// Lockstep conditional scan over `lanes.len()` lanes (a power of two).
/// Returns the number of component adds that fired.
#[inline]
pub(crate) fn scan_lanes<T: Scalar, const C: usize>(rows: &[usize], lanes: &mut [[T; C]]) -> u64 {
    let w = lanes.len();
    debug_assert_eq!(rows.len(), w);
    let mut fired = 0u64;
    let mut offset = 1;
    while offset < w {
        for i in (offset..w).rev() {
            if rows[i] == rows[i - offset] {
                let src = lanes[i - offset];
                for (d, s) in lanes[i].iter_mut().zip(src) {
                    *d += s;
                }
                fired += C as u64;
            }
        }
        offset <<= 1;
    }
    fired
}

/// Value the last lane holds after [`scan_lanes`] when every lane shares one
/// row: a balanced pairwise tree. Clobbers `lanes`.
#[inline]
pub(crate) fn tree_reduce<T: Scalar, const C: usize>(lanes: &mut [[T; C]]) -> [T; C] {
    let w = lanes.len();
    let mut stride = 1;
    while stride < w {
        let mut i = 2 * stride - 1;
        while i < w {
            let src = lanes[i - stride];
            for (d, s) in lanes[i].iter_mut().zip(src) {
                *d += s;
            }
            i += 2 * stride;
        }
        stride <<= 1;
    }
    lanes[w - 1]
}

/// Calls `f(lane, row)` for every lane that ends a run of equal rows,
/// skipping padding lanes.
#[inline]
pub(crate) fn for_each_segment_end(rows: &[usize], mut f: impl FnMut(usize, usize)) {
    let w = rows.len();
    for i in 0..w {
        let r = rows[i];
        if r == SENTINEL_ROW {
            continue;
        }
        if i + 1 == w || rows[i + 1] != r {
            f(i, r);
        }
    }
}
