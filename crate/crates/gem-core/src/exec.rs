//! Path-level execution strategies.

use alloc::vec::Vec;

/// Maps a pure per-index task over `0..count`, returning results in index
/// order. Implementations may run tasks concurrently but must not change the
/// result.
pub trait PathExecutor {
    fn map<T, F>(&self, count: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Runs every task on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl PathExecutor for Sequential {
    fn map<T, F>(&self, count: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..count).map(task).collect()
    }
}
