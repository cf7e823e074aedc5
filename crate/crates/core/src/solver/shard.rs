//! Fan-out over independent search cells.
//!
//! Cells share no mutable state. Results come back in cell order whatever the
//! worker count, and callers sort them canonically afterwards, so serial and
//! parallel runs produce identical output.

use rayon::prelude::*;

pub(crate) fn run_cells<C, T, F>(cells: &[C], workers: usize, f: F) -> Vec<T>
where
    C: Sync,
    T: Send,
    F: Fn(&C) -> Vec<T> + Sync,
{
    if workers <= 1 || cells.len() <= 1 {
        return cells.iter().flat_map(&f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("failed to start worker pool");
    let nested: Vec<Vec<T>> = pool.install(|| cells.par_iter().map(&f).collect());
    nested.into_iter().flatten().collect()
}

/// Splits `lo..=hi` into chunks of at most `size`.
pub(crate) fn chunks(lo: u64, hi: u64, size: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut start = lo;
    while start <= hi {
        let end = hi.min(start.saturating_add(size - 1));
        out.push((start, end));
        if end == u64::MAX {
            break;
        }
        start = end + 1;
    }
    out
}
