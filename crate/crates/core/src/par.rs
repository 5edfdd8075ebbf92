//! Batch map with an optional rayon backend.

use serde::{Deserialize, Serialize};

/// Degree of parallelism for batch evaluation.
///
/// `Jobs(1)` always runs on the calling thread. `Jobs(0)` uses every
/// available core. Without the `parallel` feature every setting is sequential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Jobs(pub usize);

impl Jobs {
    pub const SEQUENTIAL: Jobs = Jobs(1);
    pub const ALL: Jobs = Jobs(0);

    pub fn is_sequential(self) -> bool {
        self.0 == 1 || !cfg!(feature = "parallel")
    }
}

impl Default for Jobs {
    fn default() -> Self {
        Jobs::ALL
    }
}

/// Applies `f` to every item, preserving input order in the output.
pub fn map<T, R, F>(items: &[T], jobs: Jobs, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs.is_sequential() || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    parallel_map(items, jobs, f)
}

/// Same as [`map`] over the index range `0..n`.
pub fn map_range<R, F>(n: usize, jobs: Jobs, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    if jobs.is_sequential() || n < 2 {
        return (0..n).map(f).collect();
    }
    parallel_map_range(n, jobs, f)
}

#[cfg(feature = "parallel")]
fn with_pool<R: Send>(jobs: Jobs, op: impl FnOnce() -> R + Send) -> R {
    if jobs.0 == 0 {
        return op();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.0).build() {
        Ok(pool) => pool.install(op),
        Err(err) => {
            log::warn!(
                "could not build a {}-thread pool ({err}); using the global pool",
                jobs.0
            );
            op()
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, R, F>(items: &[T], jobs: Jobs, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    with_pool(jobs, || items.par_iter().map(f).collect())
}

#[cfg(feature = "parallel")]
fn parallel_map_range<R, F>(n: usize, jobs: Jobs, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    use rayon::prelude::*;
    with_pool(jobs, || (0..n).into_par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, R, F>(items: &[T], _jobs: Jobs, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map_range<R, F>(n: usize, _jobs: Jobs, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).map(f).collect()
}
