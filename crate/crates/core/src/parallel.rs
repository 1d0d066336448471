//! Deterministic fan-out over quadrature nodes.
//!
//! Work is split into fixed-width chunks that do not depend on the number of
//! worker threads. Each chunk accumulates its items in index order and the
//! chunk partials are then added in chunk order, so the floating point result
//! is bit-identical for any pool size.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::Real;

/// Items per chunk.
pub const CHUNK: usize = 16;

/// Environment variable read by [`configure_from_env`].
pub const WORKERS_ENV: &str = "MUSKAT_THREADS";

/// Sums per-item contributions into a vector of length `len`.
///
/// `add(i, scratch, acc)` adds item `i`'s contribution into `acc`; `init`
/// builds the per-chunk scratch state.
pub fn chunked_sum<T, S, I, F>(items: usize, len: usize, init: I, add: F) -> Result<Vec<T>>
where
    T: Real,
    I: Fn() -> S + Sync,
    F: Fn(usize, &mut S, &mut [T]) -> Result<()> + Sync,
{
    let n_chunks = items.div_ceil(CHUNK);
    let partials: Vec<Vec<T>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut scratch = init();
            let mut acc = vec![T::zero(); len];
            for i in c * CHUNK..((c + 1) * CHUNK).min(items) {
                add(i, &mut scratch, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![T::zero(); len];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    Ok(total)
}

/// Runs `f` on a dedicated pool with `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Sizes the global pool from `MUSKAT_THREADS` if it is set. Returns the
/// requested worker count.
pub fn configure_from_env() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(None);
    };
    let workers: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("{WORKERS_ENV} must be a positive integer, got {raw:?}")))?;
    if workers == 0 {
        return Err(Error::InvalidArgument(format!("{WORKERS_ENV} must be positive")));
    }
    // A second call (e.g. from tests) finds the pool already built; that is fine.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    Ok(Some(workers))
}
