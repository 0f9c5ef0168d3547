//! Data-parallel helpers.
//!
//! With the `parallel` feature (on by default) work fans out over rayon's
//! global pool; without it the same calls run sequentially. Results always
//! come back in input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the feature is enabled.
#[cfg(feature = "parallel")]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    seq_map(items, f)
}

/// Always-sequential counterpart of [`par_map`].
pub fn seq_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`.
pub fn par_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    let idx: Vec<usize> = (0..n).collect();
    par_map(&idx, |&i| f(i))
}

/// Whether this build runs [`par_map`] on a thread pool.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let v: Vec<u64> = (0..100).collect();
        assert_eq!(par_map(&v, |x| x * 2), seq_map(&v, |x| x * 2));
        assert_eq!(par_range(5, |i| i), vec![0, 1, 2, 3, 4]);
    }
}
