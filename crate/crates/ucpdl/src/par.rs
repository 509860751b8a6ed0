//! Data-parallel helpers; sequential when the `parallel` feature is off.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Whether `pred` holds for any index in `0..n`.
pub fn any_index(n: usize, pred: impl Fn(usize) -> bool + Sync + Send) -> bool {
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().any(pred)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).any(pred)
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
