//! Switchable execution strategy for embarrassingly parallel maps.
//!
//! With the `parallel` feature (on by default) the maps run on the rayon
//! thread pool; without it they run as plain sequential iterators. Results
//! are collected in index order either way, so callers observe identical
//! output regardless of the strategy — reductions over the results must not
//! depend on evaluation order, which index-ordered collection guarantees.

#[cfg(feature = "parallel")]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
