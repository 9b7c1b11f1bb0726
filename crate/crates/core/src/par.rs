//! Instance-level parallelism for sweeps and experiments.
//!
//! Each work item builds and owns its own store, so items never share
//! mutable state. With the `parallel` feature off every map runs on the
//! calling thread.

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `Parallel` when the crate was built with rayon, else `Sequential`.
    pub fn available() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }

    /// Applies `f` to every item, keeping input order in the output.
    pub fn map<T, R, F>(self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.into_par_iter().map(f).collect()
            }
            _ => items.into_iter().map(f).collect(),
        }
    }

    /// Maps `f` over `0..n`.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        self.map((0..n).collect(), f)
    }
}
