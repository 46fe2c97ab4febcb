//! Index-parallel map with a sequential fallback.
//!
//! With the `parallel` feature disabled every mode runs sequentially. Results
//! are collected in index order either way, so output never depends on the
//! worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether `Parallel` actually fans out in this build.
    pub const fn parallel_available() -> bool {
        cfg!(feature = "parallel")
    }
}

/// `(0..n).map(f)` collected in order, optionally across the rayon pool.
pub fn map_indices<T, F>(n: usize, mode: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}
