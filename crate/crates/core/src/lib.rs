//! Discrete-event simulation of a modular production plant whose parts are
//! moved between stations by AGVs, with interchangeable dispatch agents
//! (FIFO, nearest neighbor, cost table, DDQN) and a benchmark harness.

pub mod agent;
pub mod bench;
pub mod des;
pub mod dqn;
mod error;
pub mod heuristics;
pub mod plant;
pub mod sim;

pub use agent::{Agent, Decision, Experience, ObservationVector, ScoreParams};
pub use error::{Error, Result};
pub use plant::{Plant, PlantConfig};
pub use sim::{SimOptions, Simulation};
