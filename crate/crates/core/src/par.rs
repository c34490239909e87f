//! Worker pool for per-direction and per-instance work.
//!
//! Results are always collected in input order, so output does not depend on
//! scheduling. `GAUGE_MEASURE_THREADS` caps the number of workers.

use std::sync::OnceLock;

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

pub const THREADS_ENV: &str = "GAUGE_MEASURE_THREADS";

fn pool() -> &'static ThreadPool {
    static POOL: OnceLock<ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
        let mut b = ThreadPoolBuilder::new();
        if let Some(n) = n {
            b = b.num_threads(n);
        }
        b.build().expect("thread pool")
    })
}

/// `items.map(f)` in input order.
pub fn map_ordered<I, R, F>(items: &[I], f: F) -> Vec<R>
where
    I: Sync,
    R: Send,
    F: Fn(&I) -> R + Sync,
{
    pool().install(|| items.par_iter().map(&f).collect())
}

/// Like [`map_ordered`] for fallible work; the error of the lowest index wins.
pub fn try_map_ordered<I, R, E, F>(items: &[I], f: F) -> Result<Vec<R>, E>
where
    I: Sync,
    R: Send,
    E: Send,
    F: Fn(&I) -> Result<R, E> + Sync,
{
    map_ordered(items, f).into_iter().collect()
}
