//! Data-parallel kernels with a sequential fallback.
//!
//! Every helper here is deterministic regardless of thread count: parallel
//! work writes into index-addressed buffers and all floating-point reductions
//! run sequentially over those buffers. Disabling the `parallel` feature swaps
//! in plain loops with identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this many items the thread-dispatch overhead beats the per-item work
/// for the kernels in this crate; smaller maps run sequentially. The choice
/// only affects speed: every kernel computes items independently, so parallel
/// and sequential results are bitwise identical.
pub const PAR_MIN_ITEMS: usize = 4096;

/// Map `f` over `0..n` into a vector (parallel when the feature is on and the
/// range is large enough).
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if n >= PAR_MIN_ITEMS {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Sequential map over `0..n`, kept callable for benchmarks.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Fill `out[i] = f(i)` in place.
pub fn fill_indexed<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if out.len() >= PAR_MIN_ITEMS {
            out.par_iter_mut().enumerate().for_each(|(i, y)| *y = f(i));
            return;
        }
    }
    for (i, y) in out.iter_mut().enumerate() {
        *y = f(i);
    }
}

/// Sequential variant of [`fill_indexed`], kept callable for benchmarks.
pub fn fill_indexed_seq<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64,
{
    for (i, y) in out.iter_mut().enumerate() {
        *y = f(i);
    }
}

/// Deterministic sum: always sequential, in slice order.
pub fn sum(values: &[f64]) -> f64 {
    values.iter().sum()
}
