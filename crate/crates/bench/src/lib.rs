//! Experiment harness for the trajectory-based TSP: grid sweeps over
//! velocity limits and discretizations, improvement statistics against the
//! Dubins baseline, and the files the `tbtsp` command writes.

pub mod experiment;
pub mod output;

pub use experiment::{
    grid_instance, improvement_stats, run_experiment, solve_table, ConfigError, ExperimentConfig, ExperimentRun, ImprovementRow, Method,
    ResultRow, RowStatus, SolverKind, StatsError, TourRecord,
};
pub use output::{emit_outputs, tour_samples, OutputError};
