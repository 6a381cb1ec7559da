//! Shipped scenarios, the optimal-source-clock search, and run drivers.

mod runner;
mod scenario;
mod search;
mod suite;
mod train;

pub use runner::{
    run_episode, run_simulation, run_simulation_logged, throughput_pph, write_metrics_csv, Episode,
    Metrics, RunLogs, RunOptions, METRICS_HEADER,
};
pub use scenario::{scenario, Scenario, SCENARIOS};
pub use search::find_threshold;
pub use suite::{
    benchmark_suite, summary_table, SuiteAgent, SuiteFailure, SuiteOptions, SuiteReport,
};
pub use train::{
    checkpoint_agent, evaluate_checkpoint, save_training, train_agent, training_config, CurvePoint,
    Training, CHECKPOINT_FILE, CURVE_FILE,
};

use crate::agent::Agent;
use crate::error::Result;
use crate::plant::PlantConfig;

pub const DEFAULT_CLOCK_LO: u32 = 0;
pub const DEFAULT_CLOCK_HI: u32 = 600;
/// Seed of every clock-search probe.
pub const PROBE_SEED: u64 = 0;

/// Lowest integer source clock in `[lo, hi]` at which a full run with
/// `agent` ends without deadlock.
pub fn find_optimal_source_clock(
    agent: &mut dyn Agent,
    config: &PlantConfig,
    lo: u32,
    hi: u32,
    options: &RunOptions,
) -> Result<u32> {
    let options = RunOptions {
        seed: PROBE_SEED,
        ..options.clone()
    };
    find_threshold(lo, hi, |clock| {
        let config = config.clone().with_source_clock(f64::from(clock));
        Ok(run_simulation(agent, &config, &options)?.deadlocked)
    })
}
