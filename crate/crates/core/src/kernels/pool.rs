use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::{ThreadPool, ThreadPoolBuilder};

/// Runs `f` on a pool of exactly `workers` threads. Pools are built once per
/// distinct size and reused.
pub(crate) fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();
    let pool = {
        let mut pools = POOLS.get_or_init(Default::default).lock().unwrap();
        pools
            .entry(workers)
            .or_insert_with(|| {
                Arc::new(
                    ThreadPoolBuilder::new()
                        .num_threads(workers)
                        .thread_name(move |i| format!("spmm-{workers}-{i}"))
                        .build()
                        .expect("failed to build worker pool"),
                )
            })
            .clone()
    };
    pool.install(f)
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
