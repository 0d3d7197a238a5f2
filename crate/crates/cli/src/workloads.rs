//! Deterministic demo workloads, instrumented with a shared [`Timer`].
//!
//! Control flow and span counts depend only on the parameters and a fixed
//! seed; the measured durations are whatever the machine produces.

use std::collections::HashMap;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal, StandardNormal};
use thiserror::Error;
use tictoc::{Report, Timer, TimerConfig};

/// Seed for every pseudo-random draw in the demos.
pub const SEED: u64 = 20_240_601;

/// Largest Fibonacci index the naive recursion is allowed to run.
pub const MAX_FIB: u32 = 40;

/// Smallest repetition count for the overhead probe.
pub const MIN_OVERHEAD_PAIRS: u64 = 100;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WorkloadError {
    #[error("{name} must be at least {min}, got {value}")]
    TooSmall {
        name: &'static str,
        min: u64,
        value: u64,
    },
    #[error("fibonacci index must be at most {MAX_FIB}, got {0}")]
    FibOutOfRange(u32),
}

fn at_least(name: &'static str, value: u64, min: u64) -> Result<(), WorkloadError> {
    if value < min {
        return Err(WorkloadError::TooSmall { name, min, value });
    }
    Ok(())
}

fn quiet_timer(name: &str) -> Timer {
    Timer::new(TimerConfig::named(name).autoreturn(false).verbose(false))
}

/// Gibbs sampler for the bivariate example density, instrumented with one
/// scope around the whole run plus tic/toc around allocation and both loops.
pub fn gibbs(timer: &Timer, n: usize, thin: usize) -> Vec<[f64; 2]> {
    let _scope = timer.scoped("gibbs_cpp");
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    timer.tic("make_matrix");
    let mut mat = vec![[0.0f64; 2]; n];
    timer.toc("make_matrix");

    let (mut x, mut y) = (0.0f64, 0.0f64);
    for row in mat.iter_mut() {
        timer.tic("outer_loop");
        for _ in 0..thin {
            timer.tic("inner_loop");
            x = Gamma::new(3.0, 1.0 / (y * y + 4.0))
                .expect("shape and scale are positive")
                .sample(&mut rng);
            y = Normal::new(1.0 / (x + 1.0), 1.0 / (2.0 * (x + 1.0)).sqrt())
                .expect("standard deviation is positive")
                .sample(&mut rng);
            timer.toc("inner_loop");
        }
        *row = [x, y];
        timer.toc("outer_loop");
    }
    mat
}

pub fn run_gibbs(n: u64, thin: u64) -> Result<Report, WorkloadError> {
    at_least("n", n, 1)?;
    at_least("thin", thin, 1)?;
    let mut timer = quiet_timer("gibbs_cpp_times");
    gibbs(&timer, n as usize, thin as usize);
    Ok(timer.finalize())
}

pub fn fib_naive(n: u32) -> u64 {
    if n < 2 {
        u64::from(n)
    } else {
        fib_naive(n - 1) + fib_naive(n - 2)
    }
}

pub fn fib_memo(n: u32) -> u64 {
    fn go(n: u32, memo: &mut HashMap<u32, u64>) -> u64 {
        if n < 2 {
            return u64::from(n);
        }
        if let Some(&v) = memo.get(&n) {
            return v;
        }
        let v = go(n - 1, memo) + go(n - 2, memo);
        memo.insert(n, v);
        v
    }
    go(n, &mut HashMap::new())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FibValues {
    pub naive: u64,
    pub memo: Option<u64>,
}

/// Times the naive recursion under `fib` and, if requested, the memoized
/// one under `fib_memo`.
pub fn fibonacci(timer: &Timer, n: u32, memo: bool) -> Result<FibValues, WorkloadError> {
    if n > MAX_FIB {
        return Err(WorkloadError::FibOutOfRange(n));
    }
    timer.tic("fib");
    let naive = std::hint::black_box(fib_naive(std::hint::black_box(n)));
    timer.toc("fib");

    let memo = memo.then(|| {
        timer.tic("fib_memo");
        let v = std::hint::black_box(fib_memo(std::hint::black_box(n)));
        timer.toc("fib_memo");
        v
    });
    Ok(FibValues { naive, memo })
}

pub fn run_fib(n: u32, memo: bool) -> Result<(Report, FibValues), WorkloadError> {
    let mut timer = quiet_timer("fib_times");
    let values = fibonacci(&timer, n, memo)?;
    Ok((timer.finalize(), values))
}

/// Reproducible standard-normal inputs for the arctangent map.
pub fn parmap_inputs(size: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..size).map(|_| rng.sample(StandardNormal)).collect()
}

/// Replaces every value with its arctangent, split across `threads` workers,
/// timing each element under the default tag.
pub fn atan_map(timer: &Timer, values: &mut [f64], threads: usize) {
    let chunk = values.len().div_ceil(threads.max(1)).max(1);
    thread::scope(|s| {
        for part in values.chunks_mut(chunk) {
            s.spawn(move || {
                for e in part {
                    timer.tic_default();
                    *e = e.atan();
                    timer.toc_default();
                }
            });
        }
    });
}

pub fn run_parmap(size: u64, threads: u64) -> Result<Report, WorkloadError> {
    at_least("size", size, 1)?;
    at_least("threads", threads, 1)?;
    let mut timer = quiet_timer("times");
    let mut values = parmap_inputs(size as usize);
    atan_map(&timer, &mut values, threads as usize);
    Ok(timer.finalize())
}

/// Empty tic/toc pairs; the mean span approximates per-pair overhead.
pub fn overhead(timer: &Timer, pairs: u64) {
    for _ in 0..pairs {
        timer.tic_default();
        timer.toc_default();
    }
}

pub fn run_overhead(pairs: u64) -> Result<Report, WorkloadError> {
    at_least("pairs", pairs, MIN_OVERHEAD_PAIRS)?;
    let mut timer = quiet_timer("overhead_times");
    overhead(&timer, pairs);
    Ok(timer.finalize())
}
