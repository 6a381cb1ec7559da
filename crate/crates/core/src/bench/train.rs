use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::runner::{run_episode, run_simulation, Metrics, RunOptions};
use super::scenario::Scenario;
use crate::dqn::{Checkpoint, DqnAgent, Hyperparams, QNetwork};
use crate::error::{Error, Result};
use crate::plant::{Plant, PlantConfig};
use crate::sim::{SimOptions, Simulation, TWELVE_HOURS};

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const CURVE_FILE: &str = "learning_curve.csv";

/// One learning-curve row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    pub cumulative_reward: f64,
    pub parts: u64,
    pub deadlocked: bool,
}

#[derive(Debug, Clone)]
pub struct Training {
    pub checkpoint: Checkpoint,
    pub curve: Vec<CurvePoint>,
}

impl Training {
    /// Mean parts over the last `n` episodes (all of them if fewer).
    pub fn final_mean_parts(&self, n: usize) -> f64 {
        let tail = &self.curve[self.curve.len().saturating_sub(n)..];
        if tail.is_empty() {
            return 0.0;
        }
        tail.iter().map(|p| p.parts as f64).sum::<f64>() / tail.len() as f64
    }
}

/// Config the DDQN agent is trained and evaluated on: the scenario's first
/// AGV variant with the source clock at zero.
pub fn training_config(scenario: &Scenario) -> Result<PlantConfig> {
    Ok(scenario
        .config_with_agvs(scenario.agv_counts[0])?
        .with_source_clock(0.0))
}

/// Episodes between greedy probes of the network being trained.
pub const SNAPSHOT_EVERY: usize = 10;

/// Greedy copy of the online network with its probe result.
struct Snapshot {
    network: QNetwork,
    deadlocked: bool,
    parts: u64,
}

impl Snapshot {
    fn probe(agent: &DqnAgent, sim: &mut Simulation, seed: u64) -> Result<Self> {
        let mut greedy =
            DqnAgent::from_network(agent.hyperparams().clone(), agent.online().clone())?;
        let episode = run_episode(sim, &mut greedy, seed)?;
        Ok(Self {
            network: greedy.online().clone(),
            deadlocked: episode.deadlocked,
            parts: episode.parts,
        })
    }

    /// Deadlock-free beats deadlocked, then more parts.
    fn key(&self) -> (bool, u64) {
        (!self.deadlocked, self.parts)
    }
}

/// Trains a fresh agent for `episodes` episodes of `horizon` simulated
/// seconds. Episode `e` is seeded with `seed + e`. Every
/// [`SNAPSHOT_EVERY`] episodes the greedy network is run once with `seed`;
/// the checkpoint holds the best of these probes (latest on ties), or the
/// initial network when `episodes` is 0.
pub fn train_agent(
    scenario: &Scenario,
    hyper: &Hyperparams,
    episodes: usize,
    horizon: f64,
    seed: u64,
) -> Result<Training> {
    let score = scenario
        .score
        .ok_or_else(|| Error::MissingScoreParams(scenario.name.to_string()))?
        .rescaled(TWELVE_HOURS, horizon);
    let config = training_config(scenario)?;
    let config_hash = config.hash();
    let plant = Arc::new(Plant::new(config)?);
    let mut sim = Simulation::new(plant, SimOptions { horizon, score });
    let observation_len = sim.layout().len();
    let actions = sim.actions().count();
    let mut agent = DqnAgent::new(hyper.clone(), observation_len, actions)?;
    let mut curve = Vec::with_capacity(episodes);
    let mut best = Snapshot::probe(&agent, &mut sim, seed)?;
    for episode in 0..episodes {
        let result = run_episode(&mut sim, &mut agent, seed + episode as u64)?;
        curve.push(CurvePoint {
            episode,
            cumulative_reward: result.total_reward,
            parts: result.parts,
            deadlocked: result.deadlocked,
        });
        if (episode + 1) % SNAPSHOT_EVERY == 0 || episode + 1 == episodes {
            let snapshot = Snapshot::probe(&agent, &mut sim, seed)?;
            if snapshot.key() >= best.key() {
                best = snapshot;
            }
        }
    }
    Ok(Training {
        checkpoint: Checkpoint {
            hyperparams: hyper.clone(),
            config_hash,
            observation_len,
            actions,
            network: best.network,
        },
        curve,
    })
}

/// Writes the checkpoint and learning curve into `dir`; returns the
/// checkpoint path.
pub fn save_training(training: &Training, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let checkpoint = dir.join(CHECKPOINT_FILE);
    training.checkpoint.save(&checkpoint)?;
    let curve_path = dir.join(CURVE_FILE);
    let file = File::create(&curve_path).map_err(|e| Error::io(&curve_path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for point in &training.curve {
        w.serialize(point)?;
    }
    if training.curve.is_empty() {
        w.write_record(["episode", "cumulative_reward", "parts", "deadlocked"])?;
    }
    w.flush().map_err(|e| Error::io(&curve_path, e))?;
    Ok(checkpoint)
}

/// Greedy run of a trained network on the scenario it was trained for.
pub fn evaluate_checkpoint(
    scenario: &Scenario,
    checkpoint: &Checkpoint,
    horizon: f64,
    seed: u64,
) -> Result<Metrics> {
    let config = training_config(scenario)?;
    if config.hash() != checkpoint.config_hash {
        return Err(Error::CheckpointMismatch(format!(
            "checkpoint was trained on a different plant than {}",
            scenario.name
        )));
    }
    let mut agent = checkpoint_agent(checkpoint, &config)?;
    let options = RunOptions {
        scenario: scenario.name.to_string(),
        horizon,
        seed,
        score: scenario.score.unwrap_or_default(),
    };
    run_simulation(&mut agent, &config, &options)
}

/// Greedy agent from a checkpoint, checked against the shapes `config`
/// produces.
pub fn checkpoint_agent(checkpoint: &Checkpoint, config: &PlantConfig) -> Result<DqnAgent> {
    let plant = Arc::new(Plant::new(config.clone())?);
    let sim = Simulation::new(plant, SimOptions::default());
    let (obs, actions) = (sim.layout().len(), sim.actions().count());
    if checkpoint.network.input_len() != obs || checkpoint.network.output_len() != actions {
        return Err(Error::CheckpointMismatch(format!(
            "network maps {} inputs to {} actions, plant needs {obs} to {actions}",
            checkpoint.network.input_len(),
            checkpoint.network.output_len()
        )));
    }
    DqnAgent::from_network(checkpoint.hyperparams.clone(), checkpoint.network.clone())
}
