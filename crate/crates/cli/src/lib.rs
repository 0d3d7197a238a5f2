//! Demo workloads for the `tictoc-demo` binary.

pub mod workloads;

pub use workloads::{run_fib, run_gibbs, run_overhead, run_parmap, FibValues, WorkloadError};
