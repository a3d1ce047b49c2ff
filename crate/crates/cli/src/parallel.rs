//! Thread pool and parallel exhaustive searches.

use std::sync::OnceLock;

use combidyn_core::combisolve::{better, bruteforce_range, ConstraintSet, MAX_ENUMERATION};
use combidyn_core::refrigeration::{StepContext, StepObserver};
use combidyn_core::{BinaryVector, Error, Result, System};
use rayon::prelude::*;

/// Environment variable capping worker threads. `RAYON_NUM_THREADS` is
/// honored when it is unset.
pub const THREADS_ENV: &str = "COMBIDYN_THREADS";

const CHUNK_BITS: u32 = 12;

fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
    })
}

/// Runs `f` inside the capped pool.
pub fn install<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    pool().install(f)
}

/// Exact maximizer over the feasible points; same answer and tie-breaking as
/// the sequential search.
pub fn bruteforce<F>(objective: &F, constraints: &ConstraintSet, m: usize) -> Result<(BinaryVector, f64)>
where
    F: Fn(&BinaryVector) -> Result<f64> + Sync,
{
    constraints.validate(m)?;
    if let ConstraintSet::Explicit(_) = constraints {
        let mut f = |a: &BinaryVector| objective(a);
        return combidyn_core::combisolve::solve_bruteforce(&mut f, constraints, m);
    }
    if m > MAX_ENUMERATION {
        return Err(Error::EnumerationRefused { m, limit: MAX_ENUMERATION });
    }
    let total = 1u64 << m;
    let chunk = 1u64 << CHUNK_BITS.min(m as u32);
    let best = install(|| {
        (0..total / chunk)
            .into_par_iter()
            .map(|c| {
                let mut f = |a: &BinaryVector| objective(a);
                bruteforce_range(&mut f, constraints, m, c * chunk..(c + 1) * chunk)
            })
            .try_reduce(|| None, |a, b| Ok(better(a, b)))
    })?;
    best.ok_or(Error::Infeasible)
}

/// `table[mask] = objective(from_mask(mask, m))`, evaluated in parallel.
pub fn table<F>(objective: &F, m: usize, limit: usize) -> Result<Vec<f64>>
where
    F: Fn(&BinaryVector) -> Result<f64> + Sync,
{
    if m > limit {
        return Err(Error::EnumerationRefused { m, limit });
    }
    install(|| {
        (0..1u64 << m)
            .into_par_iter()
            .map(|mask| objective(&BinaryVector::from_mask(mask, m)))
            .collect()
    })
}

/// Observer that answers oracle steps with the parallel search.
pub struct ParallelOracle;

impl StepObserver for ParallelOracle {
    fn exhaustive(&mut self, ctx: &StepContext<'_>) -> Result<(BinaryVector, f64)> {
        bruteforce(&|a: &BinaryVector| ctx.payoff(a), ctx.constraints, ctx.system.decision_dim())
    }
}
