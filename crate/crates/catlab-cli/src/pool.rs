//! Scoped worker pool for parameter scans: work items are claimed through
//! an atomic counter and results land in their slot, so the output order is
//! the input order no matter which worker finishes when.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub fn parallel_map<T, F>(n_items: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.max(1).min(n_items.max(1));
    let mut slots: Vec<Option<T>> = (0..n_items).map(|_| None).collect();
    if n_items == 0 {
        return Vec::new();
    }
    if threads == 1 {
        return (0..n_items).map(f).collect();
    }

    let next = AtomicUsize::new(0);
    let results = Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= n_items {
                    break;
                }
                let value = f(idx);
                results.lock().unwrap()[idx] = Some(value);
            });
        }
    });
    slots.into_iter().map(|s| s.unwrap()).collect()
}
