//! Test functions, the replicated benchmark protocol and its metrics.

mod benchmark;
mod functions;
mod metrics;

pub use benchmark::{
    replicate_data, run_benchmark, summarize, BenchmarkOptions, BenchmarkOutput, BenchmarkResult, ReplicateData,
    ReplicateRecord,
};
pub use functions::{
    goldstein_price, hartmann6, hump, perm, rastrigin, rosenbrock, schwefel, test_function, TestFunction,
    FUNCTION_NAMES,
};
pub use metrics::{mean, pct_delta, rmspe, rmspe_std_err};
