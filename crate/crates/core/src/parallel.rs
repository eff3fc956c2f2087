//! Worker-count control for the parallel scans.
//!
//! Results never depend on the worker count: every parallel routine derives
//! its random streams from (seed, index) and collects in index order.

use crate::error::{Error, Result};

/// Runs `f` on a dedicated pool of `workers` threads; `0` uses the global pool.
pub fn with_workers<T, F>(workers: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Numeric(format!("cannot start {workers} worker threads: {e}")))?;
    Ok(pool.install(f))
}
