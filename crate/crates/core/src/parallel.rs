//! Chunked fan-out over an index range with per-worker accumulators.

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};

/// `0` means one worker per available core.
pub fn resolve_workers(requested: usize) -> usize {
    if requested > 0 {
        requested
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

/// Splits `range` into chunks of `chunk` indices. Workers claim chunks in
/// order and fold each into a private accumulator from `init`. Returns one
/// accumulator per worker; results that must not depend on scheduling
/// should be merged with an order-insensitive reduction.
pub fn fold_chunks<A, I, F>(range: Range<u64>, chunk: u64, workers: usize, init: I, fold: F) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, Range<u64>) + Sync,
{
    let chunk = chunk.max(1);
    let workers = resolve_workers(workers);
    let next = AtomicU64::new(range.start);
    let work = |acc: &mut A| loop {
        let start = next.fetch_add(chunk, Ordering::Relaxed);
        if start >= range.end {
            break;
        }
        fold(acc, start..(start + chunk).min(range.end));
    };
    if workers == 1 {
        let mut acc = init();
        work(&mut acc);
        return vec![acc];
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut acc = init();
                    work(&mut acc);
                    acc
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_every_index_once() {
        for workers in [1, 2, 3, 8] {
            let parts = fold_chunks(5..1005, 7, workers, Vec::new, |acc: &mut Vec<u64>, r| acc.extend(r));
            assert_eq!(parts.len(), workers);
            let mut all: Vec<u64> = parts.into_iter().flatten().collect();
            all.sort_unstable();
            assert_eq!(all, (5..1005).collect::<Vec<_>>());
        }
    }

    #[test]
    fn empty_range() {
        let parts = fold_chunks(3..3, 4, 2, || 0u64, |acc, r| *acc += r.end - r.start);
        assert_eq!(parts.iter().sum::<u64>(), 0);
    }
}
