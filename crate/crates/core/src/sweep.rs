//! Grid and batch evaluation helpers.
//!
//! Bound estimation and the randomized property checks reduce to "evaluate a
//! pure function over many points and fold". With the `parallel` feature the
//! fold runs on rayon; the reductions used here (`max`, `and`) are
//! associative and commutative, so the parallel result is bitwise identical
//! to the sequential one.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Supremum of `f` over `samples + 1` uniformly spaced points on `[a, b]`
/// (both endpoints included), sequential loop.
pub fn grid_sup_seq<F>(a: f64, b: f64, samples: usize, f: F) -> f64
where
    F: Fn(f64) -> f64,
{
    let h = if samples == 0 { 0.0 } else { (b - a) / samples as f64 };
    (0..=samples)
        .map(|i| f(a + h * i as f64))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Parallel version of [`grid_sup_seq`].
#[cfg(feature = "parallel")]
pub fn grid_sup_par<F>(a: f64, b: f64, samples: usize, f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    let h = if samples == 0 { 0.0 } else { (b - a) / samples as f64 };
    (0..=samples)
        .into_par_iter()
        .map(|i| f(a + h * i as f64))
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Supremum of `f` over a uniform grid, using the parallel path when the
/// `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn grid_sup<F>(a: f64, b: f64, samples: usize, f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    grid_sup_par(a, b, samples, f)
}

#[cfg(not(feature = "parallel"))]
pub fn grid_sup<F>(a: f64, b: f64, samples: usize, f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    grid_sup_seq(a, b, samples, f)
}

/// `true` iff `pred(i)` holds for every `i` in `0..count`, sequential loop.
pub fn indexed_all_seq<F>(count: usize, pred: F) -> bool
where
    F: Fn(usize) -> bool,
{
    (0..count).all(pred)
}

/// Parallel version of [`indexed_all_seq`].
#[cfg(feature = "parallel")]
pub fn indexed_all_par<F>(count: usize, pred: F) -> bool
where
    F: Fn(usize) -> bool + Sync + Send,
{
    (0..count).into_par_iter().all(pred)
}

#[cfg(feature = "parallel")]
pub fn indexed_all<F>(count: usize, pred: F) -> bool
where
    F: Fn(usize) -> bool + Sync + Send,
{
    indexed_all_par(count, pred)
}

#[cfg(not(feature = "parallel"))]
pub fn indexed_all<F>(count: usize, pred: F) -> bool
where
    F: Fn(usize) -> bool + Sync + Send,
{
    indexed_all_seq(count, pred)
}
