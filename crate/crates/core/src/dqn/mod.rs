//! Deep Q-network dispatcher: a small dense network trained with double
//! Q-learning, optional dueling head, factorized noisy layers and
//! prioritized replay.

mod adam;
mod agent;
mod checkpoint;
mod network;
mod replay;

pub use adam::Adam;
pub use agent::{ddqn_targets, select_action, DqnAgent, Hyperparams, TrainStats};
pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use network::{
    argmax, dueling_combine, huber, huber_grad, Architecture, ForwardCache, Head, Linear,
    LossGradient, LossSample, Noise, QNetwork, HUBER_DELTA,
};
pub use replay::{importance_weights, ReplayMemory, Sample, SumTree};

#[cfg(test)]
mod tests;
