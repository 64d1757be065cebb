//! Data-parallel map helper with a sequential fallback.
//!
//! All parallel loops in the crate go through [`map_indexed`], which uses
//! rayon when the `parallel` feature (default) is enabled and a plain loop
//! otherwise. Both paths produce identical output because the closure only
//! depends on the index.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sequential reference path; also used by the benchmarks for comparison.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Rayon path. Only compiled with the `parallel` feature.
#[cfg(feature = "parallel")]
pub fn map_indexed_par<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    map_indexed_par(n, f)
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T + Sync + Send,
    T: Send,
{
    map_indexed_seq(n, f)
}
