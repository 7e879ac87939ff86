//! Reproducible random streams.
//!
//! Every stochastic routine draws from ChaCha8 keyed by a user seed, with the
//! 64-bit ChaCha stream id selecting an independent stream per worker, chain
//! or replica. The same `(seed, stream)` pair always yields the same numbers,
//! independent of thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `work(k)` for `k in 0..tasks` on up to `threads` scoped workers and
/// returns the results in task order.
pub(crate) fn run_tasks<T, F>(tasks: usize, threads: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.clamp(1, tasks.max(1));
    if threads == 1 {
        return (0..tasks).map(work).collect();
    }
    let mut slots: Vec<Option<T>> = (0..tasks).map(|_| None).collect();
    std::thread::scope(|scope| {
        let work = &work;
        let handles: Vec<_> = (0..threads)
            .map(|w| scope.spawn(move || (w..tasks).step_by(threads).map(|k| (k, work(k))).collect::<Vec<_>>()))
            .collect();
        for h in handles {
            for (k, value) in h.join().expect("worker thread panicked") {
                slots[k] = Some(value);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every task produces a result")).collect()
}
