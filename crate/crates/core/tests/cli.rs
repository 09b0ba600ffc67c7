use std::path::PathBuf;
use std::process::Command;

use spkernels::bench::{gflops, parse_csv, KernelLabel};

const BENCH: &str = env!("CARGO_BIN_EXE_bench");

fn fixture() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/symmetric.mtx").to_string()
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("spkernels-cli-{}-{name}", std::process::id()))
}

#[test]
fn all_kernels_csv_and_summary() {
    let csv = scratch("all.csv");
    let out = Command::new(BENCH)
        .args([
            "--matrix",
            &fixture(),
            "--n",
            "1,4,8",
            "--repeats",
            "1",
            "--warmup",
            "0",
            "--calibrate",
        ])
        .arg("--csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# per_n_loss,4,")));
    let records = parse_csv(text.as_bytes()).unwrap();
    assert_eq!(records.len(), 3 * 5);
    assert!(records
        .iter()
        .all(|r| r.correct && r.matrix_name == "symmetric" && r.nnz == 11));
    for r in &records {
        assert!((gflops(r.nnz, r.n, r.time_seconds) - r.gflops).abs() <= 2e-5 * r.gflops);
    }
    let autos: Vec<_> = records
        .iter()
        .filter(|r| matches!(r.kernel, KernelLabel::Auto(_)))
        .collect();
    assert_eq!(autos.len(), 3);
    assert!(autos.iter().all(|r| r.selected_by_rule));

    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("calibrated thresholds"), "{stderr}");
    std::fs::remove_file(csv).ok();
}

#[test]
fn single_kernel_to_stdout_in_single_precision() {
    let out = Command::new(BENCH)
        .args([
            "--matrix",
            &fixture(),
            "--n",
            "2",
            "--kernel",
            "seq-ws",
            "--repeats",
            "1",
            "--precision",
            "32",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let records = parse_csv(&out.stdout[..]).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].kernel.to_string(), "seq-ws");
}

#[test]
fn usage_errors_exit_nonzero() {
    for args in [
        vec!["--n", "1"],
        vec!["--matrix", "/nonexistent.mtx"],
        vec!["--rmat-grid", "--kernel", "bogus"],
        vec!["--rmat-grid", "--lane-width", "3"],
        vec!["--rmat-grid", "--precision", "16"],
    ] {
        let status = Command::new(BENCH).args(&args).output().unwrap().status;
        assert!(!status.success(), "{args:?}");
    }
}
