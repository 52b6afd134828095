//! Deterministic parallel execution of independent replications.
//!
//! Work item `k` always receives the same inputs and results are returned in
//! index order, so any reduction over them is independent of scheduling and
//! of the number of workers.

use rayon::prelude::*;

/// Runs `f(0..count)` on the current rayon pool, results in index order.
pub fn par_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

/// Runs `op` on a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, op: impl FnOnce() -> R + Send) -> R {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("thread pool construction");
    pool.install(op)
}

/// Sums equal-length vectors in index order.
pub fn ordered_vector_sum(parts: &[Vec<f64>]) -> Vec<f64> {
    let mut acc = vec![0.0; parts.first().map_or(0, Vec::len)];
    for p in parts {
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
    }
    acc
}

/// Sample mean and unbiased sample variance.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var)
}
