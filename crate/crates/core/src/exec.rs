//! Execution strategy for embarrassingly parallel batch work.
//!
//! Fan-out points (suite classification, sweep cells, sampled pair checks)
//! go through [`map_collect`], which dispatches to rayon when the `parallel`
//! feature is enabled and the mode asks for it. Results are collected in
//! input order, and the only cross-item reductions used elsewhere are
//! order-independent (min/max), so sequential and parallel runs produce
//! identical output.

/// How batch work is scheduled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Plain iterator on the calling thread.
    Sequential,
    /// Rayon work-stealing pool. Falls back to sequential when the crate
    /// is built without the `parallel` feature.
    Parallel,
}

impl Default for Mode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Mode::Parallel
        } else {
            Mode::Sequential
        }
    }
}

/// Maps `f` over `items`, preserving input order in the output.
#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(mode: Mode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    match mode {
        Mode::Sequential => items.iter().map(f).collect(),
        Mode::Parallel => items.par_iter().map(f).collect(),
    }
}

/// Maps `f` over `items`, preserving input order in the output.
#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(_mode: Mode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Runs `f` inside a rayon pool of `jobs` threads (`jobs = 1` forces the
/// sequential mode, `jobs = 0` keeps the default pool). Without the
/// `parallel` feature the closure just runs on the calling thread.
pub fn run_with_jobs<R, F>(jobs: usize, f: F) -> R
where
    R: Send,
    F: FnOnce(Mode) -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match jobs {
            1 => f(Mode::Sequential),
            0 => f(Mode::Parallel),
            n => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("rayon pool")
                .install(|| f(Mode::Parallel)),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        f(Mode::Sequential)
    }
}
