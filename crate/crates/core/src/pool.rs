//! Fixed-size worker pool with order-preserving parallel map.

use std::num::NonZeroUsize;

/// Runs independent jobs either inline or on a dedicated thread pool.
/// Results always come back in input order, so output does not depend on the
/// worker count.
pub struct WorkerPool {
    pool: Option<rayon::ThreadPool>,
}

impl WorkerPool {
    pub fn sequential() -> Self {
        Self { pool: None }
    }

    /// `workers <= 1` runs inline.
    pub fn new(workers: usize) -> Self {
        if workers <= 1 {
            return Self::sequential();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("relint-worker-{i}"))
            .build()
            .ok();
        Self { pool }
    }

    /// One worker per available core.
    pub fn available() -> Self {
        Self::new(available_workers())
    }

    pub fn workers(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }

    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        use rayon::prelude::*;
        match &self.pool {
            None => items.iter().map(f).collect(),
            Some(pool) => pool.install(|| items.par_iter().map(f).collect()),
        }
    }
}

impl Default for WorkerPool {
    fn default() -> Self {
        Self::available()
    }
}

impl std::fmt::Debug for WorkerPool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WorkerPool").field("workers", &self.workers()).finish()
    }
}

pub fn available_workers() -> usize {
    std::thread::available_parallelism().map_or(1, NonZeroUsize::get)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order_for_any_worker_count() {
        let items: Vec<u64> = (0..200).collect();
        let expected: Vec<u64> = items.iter().map(|x| x * x).collect();
        for workers in [0, 1, 2, 4] {
            let pool = WorkerPool::new(workers);
            assert_eq!(pool.map(&items, |x| x * x), expected);
        }
    }

    #[test]
    fn sequential_reports_one_worker() {
        assert_eq!(WorkerPool::sequential().workers(), 1);
        assert_eq!(WorkerPool::new(3).workers(), 3);
    }
}
