//! End-to-end experiments: configuration, per-seed runs through every stage,
//! run records with a separate section for timings, and resumable sweeps.

mod config;
mod run;
mod sweep;

pub use config::{AdversarySpec, ExperimentConfig, SeedSpec};
pub use run::{
    aggregate_rows, apply_adversary, bound_inputs, failed_stage, median, run_pipeline, run_seed, Aggregate,
    RunRecord, SdpSummary, SeedRecord, StageTimes, Volatile,
};
pub use sweep::{
    aggregate_sweep_rows, read_rows, sweep, AggregateRow, SweepGrid, SweepRow, SweepSummary,
};
