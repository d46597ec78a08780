//! Data-parallel helpers. With the `parallel` feature the maps run on the
//! rayon pool; without it they run sequentially. Output order is always the
//! input order, so results are bit-identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, preserving index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
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

/// Maps `f` over a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
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

/// Pairwise (tree) summation in a fixed order.
pub fn pairwise_sum<T, F>(items: &[T], zero: &T, add: &F) -> T
where
    T: Clone,
    F: Fn(&T, &T) -> T,
{
    match items.len() {
        0 => zero.clone(),
        1 => items[0].clone(),
        n => {
            let (lo, hi) = items.split_at(n / 2);
            add(&pairwise_sum(lo, zero, add), &pairwise_sum(hi, zero, add))
        }
    }
}

/// Runs `f` on a dedicated pool of `threads` workers. Without the
/// `parallel` feature `f` simply runs on the calling thread.
pub fn with_threads<R, F>(threads: usize, f: F) -> Result<R, String>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if threads == 0 {
        return Err("thread count must be at least 1".into());
    }
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| e.to_string())?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(f())
    }
}
