use serde::{Deserialize, Serialize};

use crate::sim::Counters;

/// Weights of the score function. The `expected_*` values normalize each
/// component to roughly one over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreParams {
    pub k: f64,
    pub expected_parts: f64,
    pub expected_decisions: f64,
    pub expected_seconds: f64,
}

impl Default for ScoreParams {
    fn default() -> Self {
        Self {
            k: 4000.0,
            expected_parts: 100.0,
            expected_decisions: 300.0,
            expected_seconds: 12.0 * 3600.0,
        }
    }
}

impl ScoreParams {
    pub fn is_valid(&self) -> bool {
        [
            self.k,
            self.expected_parts,
            self.expected_decisions,
            self.expected_seconds,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite())
    }

    /// Rescales the expectations from `from` to `to` simulated seconds.
    pub fn rescaled(&self, from: f64, to: f64) -> Self {
        let f = to / from;
        Self {
            k: self.k,
            expected_parts: self.expected_parts * f,
            expected_decisions: self.expected_decisions * f,
            expected_seconds: self.expected_seconds * f,
        }
    }
}

/// Parts, completion, and decisions always count; elapsed time counts only
/// while the plant is not deadlocked.
pub fn score(counters: &Counters, deadlocked: bool, params: &ScoreParams) -> f64 {
    let parts = (counters.completed as f64 + counters.completion_sum) / params.expected_parts;
    let decisions = counters.decisions as f64 / params.expected_decisions;
    if deadlocked {
        params.k * (parts + decisions)
    } else {
        params.k * (parts + decisions + counters.time / params.expected_seconds)
    }
}

/// Score difference between consecutive decision points. The earlier state
/// is never deadlocked.
pub fn reward(
    prev: &Counters,
    next: &Counters,
    next_deadlocked: bool,
    params: &ScoreParams,
) -> f64 {
    score(next, next_deadlocked, params) - score(prev, false, params)
}
