//! Order-preserving maps over parameter lists.
//!
//! [`map_indexed`] dispatches to rayon when the `parallel` feature is on
//! and to a sequential loop otherwise. Results are always returned in
//! input order, so sweeps are reproducible whichever path runs.

/// Sequential map; always available.
pub fn map_indexed_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(usize, &T) -> R,
{
    items.iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

/// Data-parallel map over `items`.
#[cfg(feature = "parallel")]
pub fn map_indexed_par<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect()
}

/// Map with the best available backend.
pub fn map_indexed<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_indexed_par(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_seq(items, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map_indexed(&xs, |i, x| (i as u64) * 3 + x);
        let b = map_indexed_seq(&xs, |i, x| (i as u64) * 3 + x);
        assert_eq!(a, b);
        assert_eq!(a[10], 40);
    }
}
