//! Experiment runner behind the `qganlab` binary: configs, presets,
//! per-seed artifacts and sweep aggregation.

mod aggregate;
mod config;
pub mod presets;
mod runner;

pub use aggregate::{
    aggregate_dir, AggregateReport, InputStats, QganAggregate, SupervisedAggregate, AGGREGATE_CSV,
    AGGREGATE_JSON,
};
pub use config::{
    EvaluationConfig, Experiment, ExperimentConfig, Overrides, QganData, QganExperiment, ResolvedExperiment,
    SupervisedData, SupervisedExperiment, DEFAULT_OUT, SEED_ENV,
};
pub use presets::Preset;
pub use runner::{
    run_experiment, run_seed, supervised_accuracies, DistFile, QganMetrics, QganOutcome, SeedOutcome,
    SupervisedOutcome, SweepOutcome, CONFIG_FILE, DIST_FILE, METRICS_FILE, PARTIAL_MARKER, PREDICTIONS_FILE,
    SAMPLES_FILE, TRACE_FILE,
};
