//! Execution helpers: data-parallel maps with ordered accumulation.
//!
//! Results are collected in input order before any reduction, so sums are
//! bit-identical across thread counts and with the sequential fallback
//! (build with `--no-default-features` to drop the rayon dependency).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, returning results in input order.
pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
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

/// Map `f` over an index range, returning results in index order.
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

/// Ordered sum of `f` over an index range.
pub fn sum_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_range(n, f).into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let items: Vec<usize> = (0..1000).collect();
        let out = map_collect(&items, |x| x * 2);
        assert!(out.iter().enumerate().all(|(i, v)| *v == 2 * i));
    }

    #[test]
    fn sum_matches_sequential() {
        let seq: f64 = (0..500).map(|i| (i as f64).sqrt()).sum();
        let par = sum_range(500, |i| (i as f64).sqrt());
        assert_eq!(seq, par);
    }
}
