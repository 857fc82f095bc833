//! Experimental protocol: benchmark trials, summaries and significance
//! tests, q-sweeps, landscape traces and their file formats.

pub mod harness;
pub mod landscape;
pub mod problems;
pub mod report;
pub mod wilcoxon;

pub use harness::{
    compare, performance, q_grid, run_benchmark, run_trial, summarize, sweep_q, AlgorithmSummary,
    BenchmarkSummary, Marks, SweepRow, TrialResult,
};
pub use landscape::{
    landscape_config, landscape_trace, BasinMap, FnObjective, ThreeBasin, Trajectory, Well,
    THREE_BASIN_SEEDS, THREE_BASIN_START,
};
pub use problems::{preset, DataSource, Evaluation, Preset, Problem, PRESETS};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};
