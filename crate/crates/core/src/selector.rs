//! Rule-based kernel selection from row-length features and dense width.
//!
//! 1. `n <= n_parallel_max` picks parallel reduction, otherwise sequential.
//! 2. Sequential branch: balance when `stdv_row / avg_row > t_cv`.
//! 3. Parallel branch: balance when `avg_row < t_parallel_avg` (short rows
//!    leave lanes idle under row split).
//!
//! Ties go to row split, the cheaper kernel.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::features::MatrixFeatures;
use crate::kernels::{Balancing, KernelId, Reduction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectorThresholds {
    pub n_parallel_max: usize,
    pub t_parallel_avg: f64,
    pub t_cv: f64,
}

impl Default for SelectorThresholds {
    fn default() -> Self {
        Self {
            n_parallel_max: 4,
            t_parallel_avg: 32.0,
            t_cv: 1.0,
        }
    }
}

impl SelectorThresholds {
    pub fn validate(&self) -> Result<()> {
        if self.n_parallel_max == 0 {
            return Err(Error::InvalidThresholds("n_parallel_max must be positive".into()));
        }
        // Written to reject NaN as well as non-positive values.
        if [self.t_parallel_avg, self.t_cv]
            .iter()
            .any(|t| t.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::InvalidThresholds(format!(
                "thresholds must be positive, got t_parallel_avg={} t_cv={}",
                self.t_parallel_avg, self.t_cv
            )));
        }
        Ok(())
    }
}

pub fn select_kernel(f: &MatrixFeatures, n: usize, t: &SelectorThresholds) -> KernelId {
    if n <= t.n_parallel_max {
        let balancing = if f.avg_row < t.t_parallel_avg {
            Balancing::NonzeroSplit
        } else {
            Balancing::RowSplit
        };
        KernelId::new(Reduction::Parallel, balancing)
    } else {
        let balancing = if f.cv > t.t_cv {
            Balancing::NonzeroSplit
        } else {
            Balancing::RowSplit
        };
        KernelId::new(Reduction::Sequential, balancing)
    }
}

pub const T_PARALLEL_AVG_GRID: [f64; 5] = [8.0, 16.0, 32.0, 64.0, 128.0];
pub const T_CV_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// One measured (matrix, n, kernel) cell used for threshold calibration.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSample {
    /// Identifies the matrix; samples with the same key and `n` form a cell.
    pub matrix: String,
    pub features: MatrixFeatures,
    pub n: usize,
    pub kernel: KernelId,
    pub gflops: f64,
}

struct Cell {
    features: MatrixFeatures,
    n: usize,
    gflops: BTreeMap<KernelId, f64>,
}

fn cells(samples: &[CalibrationSample]) -> Vec<Cell> {
    let mut by_key: BTreeMap<(&str, usize), Cell> = BTreeMap::new();
    for s in samples {
        let cell = by_key.entry((&s.matrix, s.n)).or_insert_with(|| Cell {
            features: s.features,
            n: s.n,
            gflops: BTreeMap::new(),
        });
        let g = cell.gflops.entry(s.kernel).or_insert(s.gflops);
        *g = g.max(s.gflops);
    }
    by_key.into_values().collect()
}

/// Mean of `1 - gflops(selected) / gflops(best)` over cells. A cell whose
/// selected kernel was not measured counts as a total loss; a cell where
/// nothing achieved positive throughput counts as no loss.
fn corpus_loss(cells: &[Cell], t: &SelectorThresholds) -> f64 {
    let total: f64 = cells
        .iter()
        .map(|c| {
            let best = c.gflops.values().copied().fold(0.0, f64::max);
            if best <= 0.0 {
                return 0.0;
            }
            let chosen = select_kernel(&c.features, c.n, t);
            match c.gflops.get(&chosen) {
                Some(&g) => (1.0 - g / best).clamp(0.0, 1.0),
                None => 1.0,
            }
        })
        .sum();
    total / cells.len() as f64
}

/// Mean selection loss of `t` over `samples`.
pub fn selection_loss(samples: &[CalibrationSample], t: &SelectorThresholds) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyRecords);
    }
    Ok(corpus_loss(&cells(samples), t))
}

/// Grid search over `t_parallel_avg` and `t_cv` minimizing mean selection
/// loss. Among equal-loss candidates the one closest to the defaults (in grid
/// steps) wins. `n_parallel_max` keeps its default.
pub fn calibrate_thresholds(samples: &[CalibrationSample]) -> Result<SelectorThresholds> {
    if samples.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let cells = cells(samples);
    let defaults = SelectorThresholds::default();
    let grid_distance = |t: &SelectorThresholds| {
        (t.t_parallel_avg / defaults.t_parallel_avg).log2().abs() + (t.t_cv / defaults.t_cv).log2().abs()
    };

    let mut best = defaults;
    let mut best_loss = corpus_loss(&cells, &defaults);
    for &t_parallel_avg in &T_PARALLEL_AVG_GRID {
        for &t_cv in &T_CV_GRID {
            let candidate = SelectorThresholds {
                t_parallel_avg,
                t_cv,
                ..defaults
            };
            let loss = corpus_loss(&cells, &candidate);
            let better = loss < best_loss - 1e-12
                || ((loss - best_loss).abs() <= 1e-12 && grid_distance(&candidate) < grid_distance(&best));
            if better {
                best = candidate;
                best_loss = loss;
            }
        }
    }
    Ok(best)
}
