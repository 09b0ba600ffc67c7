//! Benchmark driver: times the four kernels and the rule-selected one over a
//! corpus, writes CSV, and prints the selection-loss summary.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, ValueEnum};

use spkernels::bench::{
    calibration_samples, directional_checks, emit_csv, format_sig, run_benchmark, summarize_selection_loss,
    BenchOptions, BenchRecord,
};
use spkernels::io::read_matrix_market;
use spkernels::rmat::default_corpus;
use spkernels::{calibrate_thresholds, CsrMatrix, KernelConfig, KernelId, Scalar, SelectorThresholds};

#[derive(Parser, Debug)]
#[command(name = "bench", about = "Sparse-times-dense kernel benchmark")]
#[command(group(ArgGroup::new("corpus").required(true).args(["matrix", "rmat_grid"])))]
struct Args {
    /// Matrix Market files to benchmark.
    #[arg(long, num_args = 1..)]
    matrix: Vec<PathBuf>,
    /// Use the built-in 27-matrix R-MAT grid.
    #[arg(long)]
    rmat_grid: bool,
    /// Dense widths to sweep.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,32,128")]
    n: Vec<usize>,
    /// auto, all, or one of par-rs, par-ws, seq-rs, seq-ws.
    #[arg(long, default_value = "all")]
    kernel: String,
    #[arg(long, default_value_t = 7)]
    repeats: usize,
    #[arg(long, default_value_t = 2)]
    warmup: usize,
    #[arg(long, default_value_t = 32)]
    lane_width: usize,
    #[arg(long, default_value_t = 256)]
    seq_chunk: usize,
    /// Worker threads (defaults to available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Seeds both the R-MAT grid and the dense inputs.
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    #[arg(long, value_enum, default_value = "64")]
    precision: Precision,
    /// Fit selector thresholds to the measured records and print them.
    #[arg(long)]
    calibrate: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Precision {
    #[value(name = "32")]
    Single,
    #[value(name = "64")]
    Double,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match args.precision {
        Precision::Single => run::<f32>(&args),
        Precision::Double => run::<f64>(&args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: some kernel outputs disagreed with the reference product");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_corpus<T: Scalar>(args: &Args) -> spkernels::Result<Vec<(String, CsrMatrix<T>)>> {
    if args.rmat_grid {
        return Ok(default_corpus::<T>(args.seed)?
            .into_iter()
            .map(|(p, a)| (p.name(), a))
            .collect());
    }
    args.matrix
        .iter()
        .map(|path| {
            let a = read_matrix_market(BufReader::new(File::open(path)?))?;
            let name = path
                .file_stem()
                .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok((name, a))
        })
        .collect()
}

fn options(args: &Args) -> spkernels::Result<BenchOptions> {
    let (kernels, include_auto) = match args.kernel.as_str() {
        "all" => (KernelId::ALL.to_vec(), true),
        "auto" => (Vec::new(), true),
        k => (vec![k.parse()?], false),
    };
    Ok(BenchOptions {
        n_values: args.n.clone(),
        kernels,
        include_auto,
        repeats: args.repeats,
        warmup: args.warmup,
        seed: args.seed,
        ..Default::default()
    })
}

fn run<T: Scalar>(args: &Args) -> spkernels::Result<bool> {
    let mut cfg = KernelConfig {
        lane_width: args.lane_width,
        seq_chunk: args.seq_chunk,
        ..Default::default()
    };
    if let Some(t) = args.threads {
        cfg.worker_count = t;
    }
    let opts = options(args)?;
    let corpus = load_corpus::<T>(args)?;
    let thresholds = SelectorThresholds::default();
    let records = run_benchmark(&corpus, &cfg, &thresholds, &opts)?;

    // Loss needs every explicit kernel plus auto in each cell.
    let summary = if opts.kernels.len() == KernelId::ALL.len() && opts.include_auto {
        Some(summarize_selection_loss(&records)?)
    } else {
        None
    };
    match &args.csv {
        Some(path) => emit_csv(&records, summary.as_ref(), BufWriter::new(File::create(path)?))?,
        None => emit_csv(&records, summary.as_ref(), io::stdout().lock())?,
    }

    let mut err = io::stderr().lock();
    if let Some(s) = &summary {
        writeln!(
            err,
            "selection loss over {} cells: overall {}",
            s.cells,
            format_sig(s.overall_loss)
        )?;
        for (n, l) in &s.per_n_loss {
            writeln!(err, "  auto       n={n:<4} {}", format_sig(*l))?;
        }
        for (k, l) in &s.single_kernel_loss {
            writeln!(err, "  always {k:<6}     {}", format_sig(*l))?;
        }
        for check in directional_checks(&corpus, &records, &cfg, &opts)? {
            writeln!(err, "{check}")?;
        }
    }
    if args.calibrate {
        let fitted = calibrate_thresholds(&calibration_samples(&corpus, &records)?)?;
        writeln!(
            err,
            "calibrated thresholds: n_parallel_max={} t_parallel_avg={} t_cv={}",
            fitted.n_parallel_max, fitted.t_parallel_avg, fitted.t_cv
        )?;
    }
    Ok(all_correct(&records))
}

fn all_correct(records: &[BenchRecord]) -> bool {
    records.iter().all(|r| r.correct)
}
