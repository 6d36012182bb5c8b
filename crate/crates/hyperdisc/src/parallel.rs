//! Multi-threaded exact search over the fixed Gray-code partitions.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use hyperdisc_core::exact::{self, ExactError, ExactResult, PartitionResult};
use hyperdisc_core::Hypergraph;

/// Exact discrepancy with the partitions spread over `threads` workers.
///
/// The partition count does not depend on `threads`, and partitions are
/// merged by `(disc, partition index)`, so the result is the same for any
/// thread count.
pub fn disc_exact_threads(
    h: &Hypergraph,
    limit_n: usize,
    threads: usize,
    stop: &(dyn Fn() -> bool + Sync),
) -> Result<ExactResult, ExactError> {
    if h.n() > limit_n.min(exact::MAX_N) {
        return Err(ExactError::TooLarge { n: h.n(), limit: limit_n.min(exact::MAX_N) });
    }
    let count = exact::partition_count(h.n());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Result<PartitionResult, ExactError>>> = Mutex::new(Vec::with_capacity(count));
    thread::scope(|s| {
        for _ in 0..threads.clamp(1, count) {
            s.spawn(|| loop {
                let part = next.fetch_add(1, Ordering::Relaxed);
                if part >= count {
                    break;
                }
                let r = exact::search_partition(h, part, stop);
                results.lock().unwrap().push(r);
            });
        }
    });
    let mut parts = results.into_inner().unwrap().into_iter().collect::<Result<Vec<_>, _>>()?;
    parts.sort_by_key(|p| p.part);
    Ok(exact::merge_partitions(h.n(), &parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hyperdisc_core::{generate, ModelParams};

    #[test]
    fn thread_count_does_not_change_the_result() {
        let h = generate(&ModelParams::edge_independent(16, 14, 0.5, 21)).unwrap();
        let one = disc_exact_threads(&h, 30, 1, &|| false).unwrap();
        for threads in [2, 3, 8, 64] {
            assert_eq!(disc_exact_threads(&h, 30, threads, &|| false).unwrap(), one);
        }
        assert_eq!(one, exact::disc_exact(&h, 30).unwrap());
    }

    #[test]
    fn limits_and_interrupts() {
        let h = generate(&ModelParams::edge_independent(24, 24, 0.5, 1)).unwrap();
        assert!(matches!(disc_exact_threads(&h, 20, 2, &|| false), Err(ExactError::TooLarge { .. })));
        assert!(matches!(disc_exact_threads(&h, 30, 2, &|| true), Err(ExactError::Interrupted { .. })));
    }
}
