//! Error and ranking metrics, experiment reports and the benchmark harness.

mod harness;
mod metrics;
mod report;

pub use harness::{
    build_similarity, parse_sweep_config, run_benchmark, run_benchmark_records, run_mc_benchmark,
    run_mc_benchmark_records, run_sweep, BenchmarkConfig, McBenchmarkConfig, SweepEntry, DEFAULT_LATENT_RANK,
    DEFAULT_TOP_N,
};
pub use metrics::{bias, coverage, f1, mae, precision_recall_f1, rmse, PredictionPair};
pub use report::{EvalReport, CSV_HEADER};
