use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::network::{argmax, Architecture, LossSample, QNetwork};
use super::replay::ReplayMemory;
use crate::agent::{Agent, Decision, Experience, ObservationVector};
use crate::error::{Error, Result};
use crate::sim::Simulation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    /// Gradient steps between hard target-network copies.
    pub target_update_every: u64,
    /// Stored experiences between gradient steps.
    pub update_every: u64,
    pub epsilon_start: f64,
    /// Multiplicative decay per decision.
    pub epsilon_decay: f64,
    pub epsilon_min: f64,
    pub per_alpha: f64,
    pub per_beta_start: f64,
    /// Decisions over which β is annealed linearly to 1.
    pub per_beta_decisions: u64,
    pub priority_floor: f64,
    /// Factor applied to rewards before they are stored.
    pub reward_scale: f64,
    pub double_q: bool,
    pub dueling: bool,
    pub noisy: bool,
    pub per: bool,
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            replay_capacity: 100_000,
            batch_size: 64,
            gamma: 0.99,
            learning_rate: 1e-3,
            target_update_every: 24,
            update_every: 4,
            epsilon_start: 1.0,
            epsilon_decay: 0.9995,
            epsilon_min: 0.01,
            per_alpha: 0.6,
            per_beta_start: 0.4,
            per_beta_decisions: 100_000,
            priority_floor: 1e-6,
            reward_scale: 1.0,
            double_q: true,
            dueling: false,
            noisy: false,
            per: true,
            hidden: vec![64, 32],
            seed: 0,
        }
    }
}

impl Hyperparams {
    /// Settings for training within a few hundred one-hour episodes:
    /// rewards shrunk to order one and faster epsilon decay.
    pub fn desk_scale() -> Self {
        Self {
            reward_scale: 1e-3,
            epsilon_decay: 0.99,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidHyperparams(what.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.epsilon_min)
            || !(self.epsilon_min..=1.0).contains(&self.epsilon_start)
        {
            return bad("epsilon must satisfy 0 <= epsilon_min <= epsilon_start <= 1");
        }
        if !(0.0..=1.0).contains(&self.epsilon_decay) {
            return bad("epsilon_decay must lie in [0, 1]");
        }
        if self.replay_capacity == 0 || self.batch_size == 0 {
            return bad("replay_capacity and batch_size must be positive");
        }
        if self.update_every == 0 || self.target_update_every == 0 {
            return bad("update intervals must be positive");
        }
        if self.learning_rate <= 0.0 || self.priority_floor <= 0.0 || self.reward_scale <= 0.0 {
            return bad("learning_rate, priority_floor and reward_scale must be positive");
        }
        Ok(())
    }

    pub fn architecture(&self, inputs: usize, outputs: usize) -> Architecture {
        Architecture {
            inputs,
            hidden: self.hidden.clone(),
            outputs,
            dueling: self.dueling,
            noisy: self.noisy,
        }
    }
}

/// Uniform random action with probability `epsilon`, otherwise the argmax of
/// `q` (lowest index on ties).
pub fn select_action(q: &[f64], epsilon: f64, rng: &mut impl Rng) -> usize {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q.len())
    } else {
        argmax(q)
    }
}

/// Bootstrapped targets. With `double_q` the online network picks the next
/// action and the target network evaluates it; otherwise the target
/// network's maximum is used.
pub fn ddqn_targets(
    rewards: &[f64],
    dones: &[bool],
    online_next: &[Vec<f64>],
    target_next: &[Vec<f64>],
    gamma: f64,
    double_q: bool,
) -> Vec<f64> {
    (0..rewards.len())
        .map(|i| {
            if dones[i] {
                return rewards[i];
            }
            let next = if double_q {
                target_next[i][argmax(&online_next[i])]
            } else {
                target_next[i]
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max)
            };
            rewards[i] + gamma * next
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrainStats {
    /// Loss of the gradient step taken, if any.
    pub loss: Option<f64>,
}

/// Deep Q-learning dispatcher.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    hyper: Hyperparams,
    online: QNetwork,
    target: QNetwork,
    adam: Adam,
    memory: ReplayMemory,
    rng: ChaCha8Rng,
    epsilon: f64,
    decisions: u64,
    gradient_steps: u64,
    training: bool,
}

impl DqnAgent {
    pub fn new(hyper: Hyperparams, observation_len: usize, actions: usize) -> Result<Self> {
        hyper.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        let online = QNetwork::new(&hyper.architecture(observation_len, actions), &mut rng);
        Ok(Self::assemble(hyper, online, rng))
    }

    /// Wraps a trained network, in evaluation mode.
    pub fn from_network(hyper: Hyperparams, network: QNetwork) -> Result<Self> {
        hyper.validate()?;
        let rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        let mut agent = Self::assemble(hyper, network, rng);
        agent.set_training(false);
        Ok(agent)
    }

    fn assemble(hyper: Hyperparams, online: QNetwork, rng: ChaCha8Rng) -> Self {
        let shapes: Vec<usize> = online.params().iter().map(|p| p.len()).collect();
        let memory = if hyper.per {
            ReplayMemory::prioritized(hyper.replay_capacity, hyper.per_alpha)
        } else {
            ReplayMemory::uniform(hyper.replay_capacity)
        };
        Self {
            adam: Adam::new(hyper.learning_rate, &shapes),
            target: online.clone(),
            online,
            memory,
            rng,
            epsilon: hyper.epsilon_start,
            decisions: 0,
            gradient_steps: 0,
            training: true,
            hyper,
        }
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyper
    }

    pub fn online(&self) -> &QNetwork {
        &self.online
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    pub fn memory(&self) -> &ReplayMemory {
        &self.memory
    }

    pub fn epsilon(&self) -> f64 {
        if self.hyper.noisy {
            0.0
        } else {
            self.epsilon
        }
    }

    pub fn decisions(&self) -> u64 {
        self.decisions
    }

    pub fn gradient_steps(&self) -> u64 {
        self.gradient_steps
    }

    pub fn is_training(&self) -> bool {
        self.training
    }

    /// Evaluation mode acts greedily on the mean weights and learns nothing.
    pub fn set_training(&mut self, training: bool) {
        self.training = training;
        if !training {
            self.online.clear_noise();
        }
    }

    pub fn q_values(&self, observation: &[f64]) -> Result<Vec<f64>> {
        self.online.forward(observation)
    }

    pub fn choose(&mut self, observation: &[f64]) -> Result<usize> {
        if !self.training {
            return Ok(argmax(&self.online.forward(observation)?));
        }
        if self.hyper.noisy {
            self.online.resample_noise(&mut self.rng);
        }
        let q = self.online.forward(observation)?;
        let epsilon = self.epsilon();
        Ok(select_action(&q, epsilon, &mut self.rng))
    }

    pub fn beta(&self) -> f64 {
        let frac = if self.hyper.per_beta_decisions == 0 {
            1.0
        } else {
            (self.decisions as f64 / self.hyper.per_beta_decisions as f64).min(1.0)
        };
        self.hyper.per_beta_start + (1.0 - self.hyper.per_beta_start) * frac
    }

    /// Stores the experience, decays epsilon, and takes a gradient step
    /// every `update_every` experiences once the memory holds a batch.
    pub fn train_step(&mut self, mut experience: Experience) -> Result<TrainStats> {
        experience.reward *= self.hyper.reward_scale;
        self.memory.push(experience);
        self.decisions += 1;
        self.epsilon = (self.epsilon * self.hyper.epsilon_decay).max(self.hyper.epsilon_min);
        if !self.decisions.is_multiple_of(self.hyper.update_every)
            || self.memory.len() < self.hyper.batch_size
        {
            return Ok(TrainStats::default());
        }
        let loss = self.gradient_step()?;
        Ok(TrainStats { loss: Some(loss) })
    }

    fn gradient_step(&mut self) -> Result<f64> {
        let sample = self
            .memory
            .sample(self.hyper.batch_size, self.beta(), &mut self.rng);
        if self.hyper.noisy {
            self.online.resample_noise(&mut self.rng);
            self.target.resample_noise(&mut self.rng);
        }
        let batch: Vec<&Experience> = sample.indices.iter().map(|&i| self.memory.get(i)).collect();
        let mut online_next = Vec::with_capacity(batch.len());
        let mut target_next = Vec::with_capacity(batch.len());
        for e in &batch {
            if self.hyper.double_q {
                online_next.push(self.online.forward(&e.next_observation)?);
            }
            target_next.push(self.target.forward(&e.next_observation)?);
        }
        let rewards: Vec<f64> = batch.iter().map(|e| e.reward).collect();
        let dones: Vec<bool> = batch.iter().map(|e| e.done).collect();
        let targets = ddqn_targets(
            &rewards,
            &dones,
            &online_next,
            &target_next,
            self.hyper.gamma,
            self.hyper.double_q,
        );
        let samples: Vec<LossSample<'_>> = batch
            .iter()
            .zip(&targets)
            .zip(&sample.weights)
            .map(|((e, &target), &weight)| LossSample {
                input: &e.observation,
                action: e.action,
                target,
                weight,
            })
            .collect();
        let result = self.online.loss_and_gradient(&samples)?;
        self.adam.apply(self.online.params_mut(), &result.grads);
        if self.memory.is_prioritized() {
            for (&i, td) in sample.indices.iter().zip(&result.td_errors) {
                self.memory
                    .set_priority(i, td.abs() + self.hyper.priority_floor);
            }
        }
        self.gradient_steps += 1;
        if self
            .gradient_steps
            .is_multiple_of(self.hyper.target_update_every)
        {
            self.target.copy_params_from(&self.online);
        }
        Ok(result.loss)
    }
}

impl Agent for DqnAgent {
    fn name(&self) -> &str {
        "ddqn"
    }

    fn act(&mut self, _sim: &Simulation, observation: &ObservationVector) -> Decision {
        let action = self
            .choose(observation)
            .expect("observation length matches the network");
        Decision::new(action)
    }

    fn observe(&mut self, experience: &Experience) {
        if self.training {
            self.train_step(experience.clone())
                .expect("experience shapes match the network");
        }
    }
}
