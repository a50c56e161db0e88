//! Thread-parallel path execution.

use std::num::NonZeroUsize;
use std::thread;

use gem_core::exec::PathExecutor;

/// Splits `0..count` into `workers` contiguous blocks, one scoped thread
/// each, and concatenates the blocks in index order.
#[derive(Debug, Clone, Copy)]
pub struct Threaded {
    workers: usize,
}

impl Threaded {
    pub fn new(workers: usize) -> Self {
        Threaded { workers: workers.max(1) }
    }

    /// One worker per available core.
    pub fn available() -> Self {
        Threaded::new(thread::available_parallelism().map_or(1, NonZeroUsize::get))
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl PathExecutor for Threaded {
    fn map<T, F>(&self, count: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        let workers = self.workers.min(count);
        if workers <= 1 {
            return (0..count).map(task).collect();
        }
        let task = &task;
        thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let (lo, hi) = (w * count / workers, (w + 1) * count / workers);
                    s.spawn(move || (lo..hi).map(task).collect::<Vec<T>>())
                })
                .collect();
            let mut out = Vec::with_capacity(count);
            for h in handles {
                out.extend(h.join().expect("worker panicked"));
            }
            out
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_index_order_for_any_worker_count() {
        for workers in [1, 2, 3, 7, 64] {
            let out = Threaded::new(workers).map(23, |i| i * i);
            assert_eq!(out, (0..23).map(|i| i * i).collect::<Vec<_>>());
        }
        assert!(Threaded::new(4).map(0, |i| i).is_empty());
        assert_eq!(Threaded::new(0).workers(), 1);
    }
}
