use std::ops::Range;

use rayon::prelude::*;

/// Fixed-size worker pool. Results come back in index order, so anything
/// reduced from them sequentially is independent of the worker count.
pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    /// `workers == 0` uses one worker per available core.
    pub fn new(workers: usize) -> Self {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("failed to build worker pool");
        Runner { pool }
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn map<T, F>(&self, range: Range<usize>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| range.into_par_iter().map(f).collect())
    }
}

impl Default for Runner {
    fn default() -> Self {
        Runner::new(0)
    }
}
