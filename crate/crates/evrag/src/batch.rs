//! Question-level parallelism over a shared corpus and gateway.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use evrag_core::reasoning::Reasoner;
use evrag_core::{LoopConfig, LoopError, RunResult, Transport};

/// Applies `f` to `0..n` on up to `parallelism` threads; results keep index order.
pub fn parallel_map<R, F>(n: usize, parallelism: NonZeroUsize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync,
{
    let workers = parallelism.get().min(n);
    if workers <= 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = f(i);
                slots.lock().expect("result slots")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots")
        .into_iter()
        .map(|r| r.expect("every index ran"))
        .collect()
}

/// Runs each question as an independent episode. A failing question yields
/// an error entry; the rest of the batch is unaffected.
pub fn run_question_batch<T: Transport>(
    questions: &[String],
    reasoner: Reasoner<'_, T>,
    config: &LoopConfig,
    parallelism: NonZeroUsize,
) -> Vec<Result<RunResult, LoopError>> {
    parallel_map(questions.len(), parallelism, |i| {
        reasoner.run_question(&questions[i], config)
    })
}
