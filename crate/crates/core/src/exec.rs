//! Data-parallel execution of independent per-cell work.
//!
//! With the `parallel` feature the work is spread over a rayon pool;
//! without it, or when [`Execution::Sequential`] is requested, cells run in
//! order on the calling thread. Results are identical either way.

/// How independent work items are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Parallel when the `parallel` feature is enabled, optionally capped to
    /// a number of worker threads.
    #[default]
    Parallel,
    ParallelThreads(usize),
}

/// Environment variable that caps raster parallelism.
pub const THREADS_ENV: &str = "IVPP_THREADS";

impl Execution {
    /// `Parallel`, capped by `IVPP_THREADS` when it holds a positive integer.
    pub fn from_env() -> Self {
        match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            Some(0) | None => Execution::Parallel,
            Some(1) => Execution::Sequential,
            Some(k) => Execution::ParallelThreads(k),
        }
    }

    /// `f(0), …, f(n−1)` in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            Execution::Parallel => parallel_map(n, f, None),
            Execution::ParallelThreads(k) => parallel_map(n, f, Some(k)),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(n: usize, f: F, threads: Option<usize>) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let run = || (0..n).into_par_iter().map(&f).collect();
    match threads {
        None => run(),
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(n: usize, f: F, _threads: Option<usize>) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let a = Execution::Sequential.map(1000, f);
        let b = Execution::Parallel.map(1000, f);
        let c = Execution::ParallelThreads(3).map(1000, f);
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}
