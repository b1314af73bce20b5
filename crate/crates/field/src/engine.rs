//! Deterministic data-parallel execution over contiguous, equal-size chunks.

use std::ops::Range;

use thiserror::Error;

/// Contiguous chunks covering `0..n`, sizes differing by at most one,
/// larger chunks first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub chunks: Vec<Range<usize>>,
    pub worker_count: usize,
}

impl Partition {
    pub fn sizes(&self) -> Vec<usize> {
        self.chunks.iter().map(|c| c.len()).collect()
    }

    /// Workers that receive no chunk.
    pub fn idle_workers(&self) -> usize {
        self.worker_count - self.chunks.len()
    }
}

/// Split `n_items` among `n_workers` (clamped to at least 1). Workers beyond
/// `n_items` stay idle and get no chunk.
pub fn partition(n_items: usize, n_workers: usize) -> Partition {
    let w = n_workers.max(1);
    let base = n_items / w;
    let extra = n_items % w;
    let mut chunks = Vec::with_capacity(w.min(n_items));
    let mut start = 0;
    for k in 0..w {
        let len = base + usize::from(k < extra);
        if len == 0 {
            break;
        }
        chunks.push(start..start + len);
        start += len;
    }
    Partition {
        chunks,
        worker_count: w,
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("could not build worker pool: {0}")]
    Pool(String),
    #[error("worker count must be >= 1")]
    NoWorkers,
}

/// Failures of individual items, ordered by index.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} item(s) failed, first at index {}: {}", .failures.len(), .failures[0].0, .failures[0].1)]
pub struct ItemFailures<E: std::fmt::Display + std::fmt::Debug> {
    pub failures: Vec<(usize, E)>,
}

/// A fixed pool of `W` workers.
pub struct Engine {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine").field("workers", &self.workers).finish()
    }
}

impl Engine {
    pub fn new(workers: usize) -> Result<Self, EngineError> {
        if workers == 0 {
            return Err(EngineError::NoWorkers);
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("chad-worker-{i}"))
            .build()
            .map_err(|e| EngineError::Pool(e.to_string()))?;
        Ok(Self { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Apply `f` to every item in place. Each chunk of the partition is owned
    /// by one task; per-chunk accumulators are returned in chunk order so the
    /// caller can fold them deterministically.
    pub fn for_each_mut<T, A, E, F>(
        &self,
        items: &mut [T],
        f: F,
    ) -> Result<Vec<A>, ItemFailures<E>>
    where
        T: Send,
        A: Default + Send,
        E: Send + std::fmt::Display + std::fmt::Debug,
        F: Fn(usize, &mut T, &mut A) -> Result<(), E> + Sync,
    {
        let part = partition(items.len(), self.workers);
        let mut slots: Vec<(A, Vec<(usize, E)>)> =
            part.chunks.iter().map(|_| (A::default(), Vec::new())).collect();
        let f = &f;
        self.pool.scope(|s| {
            let mut rest = items;
            for (range, slot) in part.chunks.iter().zip(slots.iter_mut()) {
                let (chunk, tail) = rest.split_at_mut(range.len());
                rest = tail;
                let offset = range.start;
                s.spawn(move |_| {
                    for (k, item) in chunk.iter_mut().enumerate() {
                        if let Err(e) = f(offset + k, item, &mut slot.0) {
                            slot.1.push((offset + k, e));
                        }
                    }
                });
            }
        });
        let mut failures = Vec::new();
        let mut acc = Vec::with_capacity(slots.len());
        for (a, errs) in slots {
            acc.push(a);
            failures.extend(errs);
        }
        if failures.is_empty() {
            Ok(acc)
        } else {
            Err(ItemFailures { failures })
        }
    }

    /// Map `inputs` to outputs in input order. Outputs are written into a
    /// pre-sized region, one disjoint slice per chunk.
    pub fn run_parallel<I, O, E, F>(&self, inputs: &[I], f: F) -> Result<Vec<O>, ItemFailures<E>>
    where
        I: Sync,
        O: Send,
        E: Send + std::fmt::Display + std::fmt::Debug,
        F: Fn(usize, &I) -> Result<O, E> + Sync,
    {
        let mut out: Vec<Option<O>> = std::iter::repeat_with(|| None).take(inputs.len()).collect();
        self.for_each_mut(&mut out, |i, slot: &mut Option<O>, _: &mut ()| {
            *slot = Some(f(i, &inputs[i])?);
            Ok(())
        })?;
        Ok(out.into_iter().map(|o| o.expect("every slot filled")).collect())
    }
}

/// Physical core count of this machine.
pub fn physical_cores() -> usize {
    num_cpus::get_physical().max(1)
}
