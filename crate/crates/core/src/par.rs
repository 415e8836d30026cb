//! Thin wrappers over rayon that compile to sequential loops without the
//! `parallel` feature.
//!
//! Every helper preserves input order in its output, so reductions done by the
//! caller over the returned `Vec` are bit-identical across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, keeping order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Maps `f` over `0..n`, keeping order.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Fallible variant of [`map`]; returns the first error in input order.
pub fn try_map<T, R, E, F>(items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map(items, f).into_iter().collect()
}

/// Index of the minimum of `key(i)` over `0..n`; ties go to the lowest index.
/// NaN keys never win.
pub fn argmin_range<F>(n: usize, key: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    fn better(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
        match (a.1.is_nan(), b.1.is_nan()) {
            (true, false) => b,
            (false, true) => a,
            _ if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) => b,
            _ => a,
        }
    }
    if n == 0 {
        return None;
    }
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(|i| (i, key(i))).reduce_with(better)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(|i| (i, key(i))).reduce(better)
    }
}

/// Number of worker threads the current context will use.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
