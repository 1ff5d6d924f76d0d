//! Small deterministic worker-pool helpers built on scoped threads.
//!
//! Work items are assigned to workers statically (never stolen), so a fixed
//! worker count always yields a fixed reduction order.

/// Runs `f(worker_index)` on `workers` scoped threads and returns the results
/// in worker order. With one worker the closure runs inline.
pub(crate) fn map_workers<T, F>(workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    assert!(workers >= 1);
    if workers == 1 {
        return vec![f(0)];
    }
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = (0..workers).map(|w| scope.spawn(move || f(w))).collect();
        let mut out = Vec::with_capacity(workers);
        for (w, h) in handles.into_iter().enumerate() {
            match h.join() {
                Ok(v) => out.push(v),
                Err(p) => panic!("worker {w} panicked: {p:?}"),
            }
        }
        out
    })
}

/// Splits `0..total` into `workers` contiguous ranges and runs
/// `f(worker_index, range)` on each.
pub(crate) fn for_each_range<F>(workers: usize, total: usize, f: F)
where
    F: Fn(usize, std::ops::Range<usize>) + Sync,
{
    let workers = workers.clamp(1, total.max(1));
    map_workers(workers, |w| {
        let lo = total * w / workers;
        let hi = total * (w + 1) / workers;
        if lo < hi {
            f(w, lo..hi);
        }
    });
}
