//! Seed-controlled batch evaluations: accuracy versus synthetic training-set
//! size, accuracy from very little original data, and synthesis overhead.
//!
//! Every run is a pure function of its inputs and `base_seed`; only the
//! wall-clock fields of [`ScenarioResult`] vary between repetitions.

mod config;
mod overhead;
mod report;
mod runners;

pub use config::{ExperimentConfig, ExperimentKind, JobSource, OverheadSweep};
pub use overhead::{exp_overhead, overhead_corpus};
pub use report::{aggregate, mean_abs_gap, Aggregate, EvalReport, OverheadScaling, ScenarioResult, Stat, REPORT_HEADER};
pub use runners::{
    derive_seed, exp_low_data, exp_synth_size, low_data_scenario, synth_size_scenario, RunSettings, Scenario, Stage,
};

/// Fraction of each job's rows held out for testing.
pub const TEST_FRACTION: f64 = 0.2;
pub const DEFAULT_SYNTH_SIZES: [usize; 5] = [100, 300, 1000, 3000, 10000];
pub const DEFAULT_ORIGINAL_COUNTS: [usize; 5] = [3, 5, 10, 20, 30];
pub const DEFAULT_N_SYNTHETIC: usize = 1000;
