//! Experiment harness: configuration files, end-to-end runs, sweeps and CSV
//! output.

mod config;
mod metrics;
mod runner;
mod sweep;

pub use config::{parse_config, DataSource, RunConfig, SyntheticConfig};
pub use metrics::{
    read_metrics, read_summary, MetricsRow, SummaryRow, METRICS_HEADER, SUMMARY_HEADER,
};
pub use runner::{
    evaluate_model, generate_data, prepare, run_baseline, run_experiment, train_run, Evaluation,
    Prepared, RunOutput, RunSummary,
};
pub use sweep::{sweep, SweepKey, SweepRow, SWEEP_HEADER};
