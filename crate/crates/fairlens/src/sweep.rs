//! Fan independent estimator runs across threads.
//!
//! Every cell of a sweep (one dataset × seed combination, one perturbation
//! mode, one σ rung) is fully isolated: it builds its own RNGs from its own
//! seed and shares only immutable inputs. Results come back in input order,
//! so parallel and sequential execution produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "FAIRLENS_THREADS";

/// Configure the global thread pool from [`THREADS_ENV`]. Call once at
/// startup; later calls (or an already-built pool) are ignored. Without the
/// `parallel` feature this only validates the variable.
pub fn init_thread_pool_from_env() -> Option<usize> {
    let n = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)?;
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Some(n)
}

/// Map `f` over the cells, in parallel when the `parallel` feature is on.
pub fn map_cells<I, O, F>(inputs: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync,
{
    #[cfg(feature = "parallel")]
    {
        inputs.par_iter().map(&f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        inputs.iter().map(&f).collect()
    }
}

/// Sequential reference path; the benches compare this against [`map_cells`].
pub fn map_cells_sequential<I, O, F>(inputs: &[I], f: F) -> Vec<O>
where
    F: Fn(&I) -> O,
{
    inputs.iter().map(&f).collect()
}
