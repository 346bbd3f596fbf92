//! Replication engine.
//!
//! Replications are grouped in fixed-size chunks. Each chunk is processed
//! sequentially, chunks run in parallel, and the chunk summaries are merged in
//! chunk order, so the result is bit-identical for every thread count.

mod stats;

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;

pub use stats::{Accumulator, ComponentStats, Moments, RunStats};

use crate::error::{param, Error, Result};
use crate::sample::EstimatorSample;

/// An estimator that can produce replication `index` of a run seeded by `seed`.
pub trait Replicate: Sync {
    fn replicate(&self, seed: u64, index: u64) -> Result<EstimatorSample>;
}

impl<F> Replicate for F
where
    F: Fn(u64, u64) -> Result<EstimatorSample> + Sync,
{
    fn replicate(&self, seed: u64, index: u64) -> Result<EstimatorSample> {
        self(seed, index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; 0 uses rayon's default.
    pub threads: usize,
    /// Replications per chunk.
    pub chunk: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { threads: 0, chunk: 64 }
    }
}

/// A run that stopped early. `partial` covers the chunks before the first failure.
#[derive(Debug, Clone)]
pub struct RunError {
    pub message: String,
    pub source: Option<Error>,
    pub partial: Box<RunStats>,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "run aborted after {} completed replications: {}",
            self.partial.n_reps, self.message
        )
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        self.source.as_ref().map(|e| e as _)
    }
}

enum ChunkResult {
    Done(Accumulator),
    Failed { partial: Accumulator, message: String, source: Option<Error> },
}

fn run_chunk<E: Replicate + ?Sized>(est: &E, seed: u64, start: u64, end: u64) -> ChunkResult {
    let mut acc = Accumulator::default();
    for i in start..end {
        match catch_unwind(AssertUnwindSafe(|| est.replicate(seed, i))) {
            Ok(Ok(s)) => acc.push(&s),
            Ok(Err(e)) => {
                return ChunkResult::Failed { partial: acc, message: format!("replication {i}: {e}"), source: Some(e) }
            }
            Err(payload) => {
                let what = payload
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| payload.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "unknown panic".into());
                return ChunkResult::Failed { partial: acc, message: format!("replication {i} panicked: {what}"), source: None };
            }
        }
    }
    ChunkResult::Done(acc)
}

/// Runs `n` replications of `est`.
pub fn run<E: Replicate + ?Sized>(est: &E, n: u64, seed: u64, opts: RunOptions) -> Result<RunStats, RunError> {
    let chunk = opts.chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    let work = || -> Vec<ChunkResult> {
        (0..n_chunks)
            .into_par_iter()
            .map(|c| run_chunk(est, seed, c * chunk, ((c + 1) * chunk).min(n)))
            .collect()
    };
    let results = if opts.threads == 0 {
        work()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(opts.threads).build() {
            Ok(pool) => pool.install(work),
            Err(e) => {
                return Err(RunError {
                    message: format!("could not start thread pool: {e}"),
                    source: None,
                    partial: Box::new(Accumulator::default().finish(seed)),
                })
            }
        }
    };
    let mut total = Accumulator::default();
    for r in results {
        match r {
            ChunkResult::Done(acc) => total.merge(&acc),
            ChunkResult::Failed { partial, message, source } => {
                total.merge(&partial);
                return Err(RunError { message, source, partial: Box::new(total.finish(seed)) });
            }
        }
    }
    Ok(total.finish(seed))
}

/// Replications needed so that `Pr{|estimate - z| > epsilon z} <= delta` by
/// Chebyshev: `ceil(cv^2 / (delta epsilon^2))`, at least 1.
pub fn required_samples(cv: f64, epsilon: f64, delta: f64) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(param(format!("epsilon and delta must lie in (0, 1), got {epsilon}, {delta}")));
    }
    if !(cv >= 0.0 && cv.is_finite()) {
        return Err(param(format!("cv must be finite and non-negative, got {cv}")));
    }
    // Shave a few ulps so that exact quotients like 2000.0000000000002 round down.
    let raw = cv * cv / (delta * epsilon * epsilon) * (1.0 - 4.0 * f64::EPSILON);
    Ok((raw.ceil() as u64).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RandomSource, StreamKey, SubStream};

    fn noisy(seed: u64, i: u64) -> Result<EstimatorSample> {
        let mut s = StreamKey::new(seed, i, SubStream::Auxiliary).stream();
        let x = s.uniform();
        Ok(EstimatorSample::single("x", x, 1 + i % 3, i % 5))
    }

    #[test]
    fn sample_size_planning() {
        assert_eq!(required_samples(1.0, 0.1, 0.05).unwrap(), 2000);
        assert_eq!(required_samples(0.0, 0.1, 0.05).unwrap(), 1);
        assert_eq!(required_samples(1.97, 0.05, 0.05).unwrap(), 31048);
        assert!(required_samples(1.0, 0.0, 0.05).is_err());
        assert!(required_samples(1.0, 0.1, 1.0).is_err());
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let one = run(&noisy, 10_001, 9, RunOptions { threads: 1, chunk: 64 }).unwrap();
        let many = run(&noisy, 10_001, 9, RunOptions { threads: 4, chunk: 64 }).unwrap();
        assert_eq!(one, many);
        assert_eq!(one.mean.to_bits(), many.mean.to_bits());
        assert_eq!(one.n_reps, 10_001);
    }

    #[test]
    fn smallest_run_is_finite() {
        let s = run(&noisy, 2, 1, RunOptions::default()).unwrap();
        assert!(s.std_error.is_finite());
    }

    #[test]
    fn panic_gives_partial_report() {
        let est = |seed: u64, i: u64| {
            if i == 300 {
                panic!("boom");
            }
            noisy(seed, i)
        };
        let err = run(&est, 1000, 1, RunOptions { threads: 1, chunk: 100 }).unwrap_err();
        assert_eq!(err.partial.n_reps, 300);
        assert!(err.message.contains("boom"));
    }

    #[test]
    fn error_gives_partial_report() {
        let est = |seed: u64, i: u64| {
            if i == 150 {
                return Err(Error::TailUnderflow { threshold: 1.0 });
            }
            noisy(seed, i)
        };
        let err = run(&est, 1000, 1, RunOptions { threads: 2, chunk: 100 }).unwrap_err();
        assert_eq!(err.partial.n_reps, 150);
        assert!(matches!(err.source, Some(Error::TailUnderflow { .. })));
    }
}
