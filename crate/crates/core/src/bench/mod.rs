//! Benchmark harness: times every kernel plus the rule-selected one over a
//! corpus and a sweep of dense widths, verifies each against the reference
//! product, and summarizes how much throughput rule-based selection loses
//! against the per-cell best kernel.

mod csv;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use self::csv::{emit_csv, format_sig, parse_csv, CSV_HEADER};
use crate::error::{Error, Result};
use crate::features::{extract_features, MatrixFeatures};
use crate::kernels::{spmm, KernelConfig, KernelId};
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::oracle::{oracle_abs_spmm, oracle_spmm, tolerance_ratio};
use crate::scalar::Scalar;
use crate::selector::{select_kernel, CalibrationSample, SelectorThresholds};

/// What a [`BenchRecord`] measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelLabel {
    Kernel(KernelId),
    /// The rule-selected kernel, timed as its own run.
    Auto(KernelId),
    Oracle,
}

impl KernelLabel {
    pub fn kernel_id(self) -> Option<KernelId> {
        match self {
            KernelLabel::Kernel(k) | KernelLabel::Auto(k) => Some(k),
            KernelLabel::Oracle => None,
        }
    }
}

impl fmt::Display for KernelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelLabel::Kernel(k) => write!(f, "{k}"),
            KernelLabel::Auto(k) => write!(f, "auto:{k}"),
            KernelLabel::Oracle => f.write_str("oracle"),
        }
    }
}

impl FromStr for KernelLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "oracle" {
            Ok(KernelLabel::Oracle)
        } else if let Some(k) = s.strip_prefix("auto:") {
            Ok(KernelLabel::Auto(k.parse()?))
        } else {
            Ok(KernelLabel::Kernel(s.parse()?))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub matrix_name: String,
    pub num_rows: usize,
    pub num_cols: usize,
    pub nnz: usize,
    pub n: usize,
    pub kernel: KernelLabel,
    /// Median wall time over the measured repeats.
    pub time_seconds: f64,
    pub gflops: f64,
    pub correct: bool,
    pub selected_by_rule: bool,
}

/// `2 · nnz · n` floating-point operations per product.
pub fn gflops(nnz: usize, n: usize, time_seconds: f64) -> f64 {
    2.0 * nnz as f64 * n as f64 / time_seconds / 1e9
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub n_values: Vec<usize>,
    /// Kernels timed explicitly.
    pub kernels: Vec<KernelId>,
    /// Also time the rule-selected kernel as an `auto` record.
    pub include_auto: bool,
    pub include_oracle: bool,
    pub repeats: usize,
    pub warmup: usize,
    /// Seed for the dense operand.
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            n_values: vec![1, 2, 4, 8, 32, 128],
            kernels: KernelId::ALL.to_vec(),
            include_auto: true,
            include_oracle: false,
            repeats: 7,
            warmup: 2,
            seed: 0x5eed,
        }
    }
}

/// Deterministic dense operand with entries uniform in `[-1, 1]`.
pub fn dense_input<T: Scalar>(rows: usize, cols: usize, seed: u64) -> DenseMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| T::from_f64_lossy(rng.gen_range(-1.0..=1.0)))
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

/// Runs `f` `warmup` times unmeasured, then `repeats` times; returns the
/// median seconds.
pub fn time_median<R>(warmup: usize, repeats: usize, mut f: impl FnMut() -> R) -> f64 {
    for _ in 0..warmup {
        std::hint::black_box(f());
    }
    let samples = (0..repeats.max(1))
        .map(|_| {
            let t0 = Instant::now();
            std::hint::black_box(f());
            t0.elapsed().as_secs_f64()
        })
        .collect();
    median(samples).max(1e-9)
}

struct Reference {
    oracle: DenseMatrix<f64>,
    magnitude: DenseMatrix<f64>,
    max_row_nnz: usize,
}

impl Reference {
    fn accepts<T: Scalar>(&self, y: &DenseMatrix<T>) -> bool {
        tolerance_ratio(y, &self.oracle, &self.magnitude, self.max_row_nnz) <= 1.0
    }
}

/// Times the configured kernels over every `(matrix, n)` cell.
///
/// Cells are measured one at a time. A kernel whose output disagrees with the
/// reference product is recorded with `correct = false`; the run continues.
pub fn run_benchmark<T: Scalar>(
    corpus: &[(String, CsrMatrix<T>)],
    cfg: &KernelConfig,
    thresholds: &SelectorThresholds,
    opts: &BenchOptions,
) -> Result<Vec<BenchRecord>> {
    if corpus.is_empty() {
        return Err(Error::InvalidConfig("benchmark corpus is empty".into()));
    }
    if opts.repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be at least 1".into()));
    }
    cfg.validate()?;
    thresholds.validate()?;

    let mut records = Vec::new();
    for (name, a) in corpus {
        let features = extract_features(a)?;
        for &n in &opts.n_values {
            let x = dense_input::<T>(a.num_cols(), n, opts.seed);
            let reference = Reference {
                oracle: oracle_spmm(a, &x)?,
                magnitude: oracle_abs_spmm(a, &x)?,
                max_row_nnz: a.max_row_nnz(),
            };
            let chosen = select_kernel(&features, n, thresholds);
            let record = |kernel: KernelLabel, time_seconds: f64, correct: bool| BenchRecord {
                matrix_name: name.clone(),
                num_rows: a.num_rows(),
                num_cols: a.num_cols(),
                nnz: a.nnz(),
                n,
                kernel,
                time_seconds,
                gflops: gflops(a.nnz(), n, time_seconds),
                correct,
                selected_by_rule: kernel.kernel_id() == Some(chosen),
            };

            let mut labels: Vec<KernelLabel> = opts.kernels.iter().map(|&k| KernelLabel::Kernel(k)).collect();
            if opts.include_auto {
                labels.push(KernelLabel::Auto(chosen));
            }
            for label in labels {
                let k = label.kernel_id().expect("kernel label");
                let correct = spmm(k, a, &x, cfg).map(|y| reference.accepts(&y)).unwrap_or(false);
                let t = time_median(opts.warmup, opts.repeats, || spmm(k, a, &x, cfg));
                records.push(record(label, t, correct));
            }
            if opts.include_oracle {
                let t = time_median(opts.warmup, opts.repeats, || oracle_spmm(a, &x));
                records.push(record(KernelLabel::Oracle, t, true));
            }
        }
    }
    Ok(records)
}

/// Mean selection losses, each `1 - gflops / best_gflops` with `best` the
/// fastest of the four explicit kernels in the cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelectionLossSummary {
    /// Loss of the rule-selected kernel, averaged over matrices, per `n`.
    pub per_n_loss: BTreeMap<usize, f64>,
    /// Loss of always using one kernel, averaged over every cell.
    pub single_kernel_loss: BTreeMap<KernelId, f64>,
    /// Loss of the rule-selected kernel averaged over every cell.
    pub overall_loss: f64,
    pub cells: usize,
}

impl SelectionLossSummary {
    pub fn best_single_kernel(&self) -> Option<(KernelId, f64)> {
        self.single_kernel_loss
            .iter()
            .map(|(&k, &l)| (k, l))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

fn loss(g: f64, best: f64) -> f64 {
    if best <= 0.0 {
        0.0
    } else {
        (1.0 - g / best).clamp(0.0, 1.0)
    }
}

pub fn summarize_selection_loss(records: &[BenchRecord]) -> Result<SelectionLossSummary> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    // (matrix, n) -> (explicit kernel gflops, auto gflops)
    type Cell = (BTreeMap<KernelId, f64>, Option<f64>);
    let mut cells: BTreeMap<(&str, usize), Cell> = BTreeMap::new();
    for r in records {
        let cell = cells.entry((&r.matrix_name, r.n)).or_default();
        match r.kernel {
            KernelLabel::Kernel(k) => {
                cell.0.insert(k, r.gflops);
            }
            KernelLabel::Auto(_) => cell.1 = Some(r.gflops),
            KernelLabel::Oracle => {}
        }
    }

    let mut per_n: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    let mut single: BTreeMap<KernelId, f64> = BTreeMap::new();
    let mut overall = 0.0;
    for (&(matrix, n), (kernels, auto)) in &cells {
        let missing = |kernel: String| Error::MissingCell {
            matrix: matrix.to_string(),
            n,
            kernel,
        };
        for k in KernelId::ALL {
            if !kernels.contains_key(&k) {
                return Err(missing(k.to_string()));
            }
        }
        let auto = auto.ok_or_else(|| missing("auto".into()))?;
        let best = kernels.values().copied().fold(0.0, f64::max);
        let l = loss(auto, best);
        let e = per_n.entry(n).or_default();
        e.0 += l;
        e.1 += 1;
        overall += l;
        for (&k, &g) in kernels {
            *single.entry(k).or_default() += loss(g, best);
        }
    }
    let count = cells.len() as f64;
    Ok(SelectionLossSummary {
        per_n_loss: per_n.into_iter().map(|(n, (s, c))| (n, s / c as f64)).collect(),
        single_kernel_loss: single.into_iter().map(|(k, s)| (k, s / count)).collect(),
        overall_loss: overall / count,
        cells: cells.len(),
    })
}

/// Calibration samples from the explicit-kernel records.
pub fn calibration_samples<T>(
    corpus: &[(String, CsrMatrix<T>)],
    records: &[BenchRecord],
) -> Result<Vec<CalibrationSample>> {
    let features: BTreeMap<&str, MatrixFeatures> = corpus
        .iter()
        .map(|(name, a)| extract_features(a).map(|f| (name.as_str(), f)))
        .collect::<Result<_>>()?;
    Ok(records
        .iter()
        .filter_map(|r| match r.kernel {
            KernelLabel::Kernel(kernel) => features.get(r.matrix_name.as_str()).map(|&f| CalibrationSample {
                matrix: r.matrix_name.clone(),
                features: f,
                n: r.n,
                kernel,
                gflops: r.gflops,
            }),
            _ => None,
        })
        .collect())
}

/// A report-only performance expectation carried over from the GPU setting.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalCheck {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

impl fmt::Display for DirectionalCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.holds { "holds" } else { "WARN: inverted" };
        write!(f, "{}: {} ({})", self.name, verdict, self.detail)
    }
}

fn median_gflops<'a>(records: impl Iterator<Item = &'a BenchRecord>) -> Option<f64> {
    let v: Vec<f64> = records.map(|r| r.gflops).collect();
    (!v.is_empty()).then(|| median(v))
}

/// Two directional expectations, evaluated on this machine:
///
/// * on skewed matrices (`cv > 1`) at the widest `n`, the balanced sequential
///   kernel is at least as fast as the row-split one (median GFLOPS);
/// * at `n` in {2, 4}, row-split parallel reduction with multi-column lanes
///   is at least as fast as the same kernel forced to one column per lane.
///
/// Failures are warnings: CPU behavior may legitimately invert GPU trends.
pub fn directional_checks<T: Scalar>(
    corpus: &[(String, CsrMatrix<T>)],
    records: &[BenchRecord],
    cfg: &KernelConfig,
    opts: &BenchOptions,
) -> Result<Vec<DirectionalCheck>> {
    let mut checks = Vec::new();

    let skewed: Vec<&str> = corpus
        .iter()
        .filter(|(_, a)| extract_features(a).map(|f| f.cv > 1.0).unwrap_or(false))
        .map(|(name, _)| name.as_str())
        .collect();
    if let Some(&n_max) = opts.n_values.iter().max() {
        let pick = |k: KernelId| {
            median_gflops(records.iter().filter(|r| {
                r.n == n_max && r.kernel == KernelLabel::Kernel(k) && skewed.contains(&r.matrix_name.as_str())
            }))
        };
        if let (Some(bal), Some(rs)) = (pick(KernelId::SeqBalanced), pick(KernelId::SeqRowSplit)) {
            checks.push(DirectionalCheck {
                name: format!("seq-ws >= seq-rs on skewed matrices at n={n_max}"),
                holds: bal >= rs,
                detail: format!(
                    "{} matrices, median GFLOPS {} vs {}",
                    skewed.len(),
                    format_sig(bal),
                    format_sig(rs)
                ),
            });
        }
    }

    let scalar_cfg = KernelConfig {
        vdl_group: Some(1),
        ..cfg.clone()
    };
    for n in [2usize, 4] {
        let (mut wide, mut narrow) = (Vec::new(), Vec::new());
        for (_, a) in corpus {
            let x = dense_input::<T>(a.num_cols(), n, opts.seed);
            let t_wide = time_median(opts.warmup, opts.repeats, || spmm(KernelId::ParRowSplit, a, &x, cfg));
            let t_narrow = time_median(opts.warmup, opts.repeats, || {
                spmm(KernelId::ParRowSplit, a, &x, &scalar_cfg)
            });
            wide.push(gflops(a.nnz(), n, t_wide));
            narrow.push(gflops(a.nnz(), n, t_narrow));
        }
        let (w, s) = (median(wide), median(narrow));
        checks.push(DirectionalCheck {
            name: format!("par-rs with C={} >= C=1 at n={n}", cfg.group_for(n)),
            holds: w >= s,
            detail: format!("median GFLOPS {} vs {}", format_sig(w), format_sig(s)),
        });
    }
    Ok(checks)
}
