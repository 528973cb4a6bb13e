//! Sequential / data-parallel dispatch.
//!
//! Every parallel loop in the crate goes through [`map_range`], which splits
//! work by index and collects results in index order. Each item is computed
//! by the same code on either path, so both strategies produce bit-identical
//! output. Without the `parallel` feature, [`Execution::Parallel`] silently
//! runs sequentially.

/// How data-parallel inner loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// True when this strategy will actually fan out to a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f(0..len)` and returns the results in index order.
pub fn map_range<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}
