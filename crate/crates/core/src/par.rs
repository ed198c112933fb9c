//! Execution policy for data-parallel loops.
//!
//! With the `parallel` feature, [`Execution::Parallel`] runs on rayon (a dedicated
//! pool when a thread cap is given). Without it every policy runs sequentially.
//! Results always come back in input order, so the choice never changes output.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    /// `threads: None` uses the global pool.
    Parallel {
        threads: Option<usize>,
    },
    #[default]
    Auto,
}

impl Execution {
    /// Reads the `GRAPHHYPO_THREADS` cap; `1` means sequential.
    pub fn from_env() -> Self {
        match std::env::var("GRAPHHYPO_THREADS")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
        {
            Some(0) | None => Execution::Auto,
            Some(1) => Execution::Sequential,
            Some(n) => Execution::Parallel { threads: Some(n) },
        }
    }

    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self != Execution::Sequential
    }
}

/// Applies `f` to every index in `0..len`, returning results in index order.
pub fn map_indexed<R, F>(exec: Execution, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let run = || (0..len).into_par_iter().map(&f).collect::<Vec<_>>();
        match exec {
            Execution::Sequential => {}
            Execution::Parallel { threads: Some(n) } => {
                if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                    return pool.install(run);
                }
                return run();
            }
            Execution::Parallel { threads: None } | Execution::Auto => return run(),
        }
    }
    let _ = exec;
    (0..len).map(f).collect()
}
