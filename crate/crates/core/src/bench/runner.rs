use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, Experience, ScoreParams};
use crate::error::Result;
use crate::plant::{Plant, PlantConfig};
use crate::sim::{SimOptions, Simulation, TWELVE_HOURS};

/// One benchmark row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub scenario: String,
    pub agent: String,
    pub n_agvs: usize,
    pub source_clock_s: f64,
    pub throughput_pph: f64,
    pub total_parts: u64,
    pub deadlocked: bool,
    pub sim_seconds: f64,
    pub wall_seconds: f64,
    pub seed: u64,
}

impl Metrics {
    /// The row with `wall_seconds` zeroed, for reproducibility comparisons.
    pub fn without_wall_time(&self) -> Self {
        Self {
            wall_seconds: 0.0,
            ..self.clone()
        }
    }
}

pub fn throughput_pph(parts: u64, sim_seconds: f64) -> f64 {
    if sim_seconds > 0.0 {
        parts as f64 / (sim_seconds / 3600.0)
    } else {
        0.0
    }
}

/// Summary of one reset-to-done episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Episode {
    pub total_reward: f64,
    pub parts: u64,
    pub deadlocked: bool,
    pub sim_seconds: f64,
    pub decisions: u64,
    pub steps: u64,
}

/// Resets `sim` with `seed` and lets `agent` act until the run ends. Every
/// transition is passed to [`Agent::observe`].
pub fn run_episode(sim: &mut Simulation, agent: &mut dyn Agent, seed: u64) -> Result<Episode> {
    let mut observation = sim.reset(seed);
    let mut total_reward = 0.0;
    let mut steps = 0;
    while sim.decision_pending() {
        let decision = agent.act(sim, &observation);
        let t = sim.step(decision)?;
        total_reward += t.reward;
        steps += 1;
        agent.observe(&Experience {
            observation,
            action: decision.action,
            reward: t.reward,
            next_observation: t.observation.clone(),
            done: t.done,
        });
        observation = t.observation;
    }
    Ok(Episode {
        total_reward,
        parts: sim.state().completed,
        deadlocked: sim.is_deadlocked(),
        sim_seconds: sim.clock(),
        decisions: sim.state().decisions,
        steps,
    })
}

/// Settings of a single benchmark run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub scenario: String,
    pub horizon: f64,
    pub seed: u64,
    pub score: ScoreParams,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            scenario: "custom".into(),
            horizon: TWELVE_HOURS,
            seed: 0,
            score: ScoreParams::default(),
        }
    }
}

/// Optional sinks for the event trace and the decision log.
#[derive(Default)]
pub struct RunLogs {
    pub trace: Option<Box<dyn Write + Send>>,
    pub decisions: Option<Box<dyn Write + Send>>,
}

pub fn run_simulation(
    agent: &mut dyn Agent,
    config: &PlantConfig,
    options: &RunOptions,
) -> Result<Metrics> {
    run_simulation_logged(agent, config, options, RunLogs::default())
}

pub fn run_simulation_logged(
    agent: &mut dyn Agent,
    config: &PlantConfig,
    options: &RunOptions,
    logs: RunLogs,
) -> Result<Metrics> {
    let plant = Arc::new(Plant::new(config.clone())?);
    let mut sim = Simulation::new(
        plant,
        SimOptions {
            horizon: options.horizon,
            score: options.score,
        },
    );
    if let Some(t) = logs.trace {
        sim.set_trace(t);
    }
    if let Some(d) = logs.decisions {
        sim.set_decision_log(d);
    }
    let start = Instant::now();
    let episode = run_episode(&mut sim, agent, options.seed)?;
    let wall_seconds = start.elapsed().as_secs_f64();
    sim.flush_logs()
        .map_err(|e| crate::Error::io("run log", e))?;
    Ok(Metrics {
        scenario: options.scenario.clone(),
        agent: agent.name().to_string(),
        n_agvs: config.agvs.len(),
        source_clock_s: config.source_clock_s,
        throughput_pph: throughput_pph(episode.parts, episode.sim_seconds),
        total_parts: episode.parts,
        deadlocked: episode.deadlocked,
        sim_seconds: episode.sim_seconds,
        wall_seconds,
        seed: options.seed,
    })
}

/// Writes rows with the standard header, even when `rows` is empty.
pub fn write_metrics_csv<W: Write>(out: W, rows: &[Metrics]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| crate::Error::io("metrics csv", e))?;
    Ok(())
}

pub const METRICS_HEADER: [&str; 10] = [
    "scenario",
    "agent",
    "n_agvs",
    "source_clock_s",
    "throughput_pph",
    "total_parts",
    "deadlocked",
    "sim_seconds",
    "wall_seconds",
    "seed",
];
