//! Order-preserving parallel map. Results always come back in input order so
//! that reductions done afterwards are deterministic across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
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

pub(crate) fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
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

/// Sums `f(k)` for k in 0..n over fixed-size chunks, adding the chunk totals
/// in order. The result does not depend on the thread count.
pub(crate) fn chunked_sum<F>(n: usize, f: F) -> (f64, f64)
where
    F: Fn(usize) -> (f64, f64) + Sync + Send,
{
    const CHUNK: usize = 4096;
    let chunks = n.div_ceil(CHUNK);
    let parts = map_range(chunks, |c| {
        let mut acc = (0.0, 0.0);
        for k in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let (a, b) = f(k);
            acc.0 += a;
            acc.1 += b;
        }
        acc
    });
    parts.into_iter().fold((0.0, 0.0), |s, p| (s.0 + p.0, s.1 + p.1))
}
