//! The contract between the simulation and dispatch agents: actions,
//! observations, the score that rewards are derived from, and experiences.

mod observation;
mod score;

use std::ops::Deref;

pub use observation::{encode_observation, part_completion, DecodedObservation, ObservationLayout};
pub use score::{reward, score, ScoreParams};

use crate::plant::Plant;
use crate::sim::Simulation;

/// Flat numeric encoding of the simulation state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservationVector(pub Vec<f64>);

impl Deref for ObservationVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Action `i < count - 1` picks up at the `i`-th pickup station (source and
/// machines in config order); the last action does nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpec {
    stations: Vec<usize>,
}

impl ActionSpec {
    pub fn new(plant: &Plant) -> Self {
        Self {
            stations: plant.pickup_stations().to_vec(),
        }
    }

    pub fn count(&self) -> usize {
        self.stations.len() + 1
    }

    pub fn do_nothing(&self) -> usize {
        self.stations.len()
    }

    pub fn station(&self, action: usize) -> Option<usize> {
        self.stations.get(action).copied()
    }

    pub fn index_of(&self, station: usize) -> Option<usize> {
        self.stations.iter().position(|&s| s == station)
    }
}

/// An agent's answer to a decision request. `assignee` pins the job to a
/// specific waiting AGV instead of the controller's closest-AGV rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub action: usize,
    pub assignee: Option<usize>,
}

impl Decision {
    pub fn new(action: usize) -> Self {
        Self {
            action,
            assignee: None,
        }
    }

    pub fn pinned(action: usize, agv: usize) -> Self {
        Self {
            action,
            assignee: Some(agv),
        }
    }
}

impl From<usize> for Decision {
    fn from(action: usize) -> Self {
        Self::new(action)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub observation: ObservationVector,
    pub action: usize,
    pub reward: f64,
    pub next_observation: ObservationVector,
    pub done: bool,
}

/// Common interface of deterministic and trainable agents.
pub trait Agent {
    fn name(&self) -> &str;

    fn act(&mut self, sim: &Simulation, observation: &ObservationVector) -> Decision;

    /// Receives the outcome of the last decision. Trainable agents learn here.
    fn observe(&mut self, _experience: &Experience) {}
}
