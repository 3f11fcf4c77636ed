//! Data-parallel fan-out with a sequential fallback.
//!
//! The hot loops in this crate (Monte Carlo rollouts, short-trajectory
//! collection, per-state SVDs) are index-parallel: unit `i` derives its own
//! RNG substream, so the result is a pure function of the index and the
//! outputs can be collected in index order. With the `parallel` feature the
//! maps run on rayon; without it they run on the current thread. Both paths
//! produce bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Sequential twin of [`map_indexed`], kept unconditionally for benchmarks.
pub(crate) fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Fold `0..n` into per-chunk accumulators and merge them.
///
/// `make` builds an empty accumulator, `fold` absorbs one index, `merge`
/// combines two accumulators. Merging must be associative and commutative up
/// to the caller's tolerance; the callers here accumulate integer-valued
/// counts, for which f64 addition is exact.
#[cfg(feature = "parallel")]
pub(crate) fn fold_indexed<A, FM, FF, FR>(n: usize, make: FM, fold: FF, merge: FR) -> A
where
    A: Send,
    FM: Fn() -> A + Sync + Send,
    FF: Fn(A, usize) -> A + Sync + Send,
    FR: Fn(A, A) -> A + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .fold(&make, |acc, i| fold(acc, i))
        .reduce(&make, merge)
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn fold_indexed<A, FM, FF, FR>(n: usize, make: FM, fold: FF, _merge: FR) -> A
where
    FM: Fn() -> A,
    FF: Fn(A, usize) -> A,
    FR: Fn(A, A) -> A,
{
    (0..n).fold(make(), fold)
}

/// Sequential twin of [`fold_indexed`], kept unconditionally for benchmarks.
pub(crate) fn fold_indexed_seq<A, FM, FF>(n: usize, make: FM, fold: FF) -> A
where
    FM: Fn() -> A,
    FF: Fn(A, usize) -> A,
{
    (0..n).fold(make(), fold)
}
