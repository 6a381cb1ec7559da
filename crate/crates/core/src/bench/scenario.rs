use crate::agent::ScoreParams;
use crate::error::{Error, Result};
use crate::plant::PlantConfig;

/// A shipped benchmark plant.
#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    pub name: &'static str,
    json: &'static str,
    /// AGV counts the benchmark runs.
    pub agv_counts: &'static [usize],
    /// Score weights for DDQN training over a 12-hour run.
    pub score: Option<ScoreParams>,
    pub notes: &'static str,
}

impl Scenario {
    pub fn config(&self) -> Result<PlantConfig> {
        PlantConfig::from_json(self.json)
    }

    pub fn config_with_agvs(&self, n: usize) -> Result<PlantConfig> {
        Ok(self.config()?.with_agv_count(n))
    }

    pub fn json(&self) -> &'static str {
        self.json
    }
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "mayer",
        json: include_str!("../../scenarios/mayer.json"),
        agv_counts: &[1],
        score: Some(MAYER_SCORE),
        notes: "two machines in series, one AGV, one part type; machine-bound",
    },
    Scenario {
        name: "1-machine-big",
        json: include_str!("../../scenarios/1-machine-big.json"),
        agv_counts: &[2],
        score: None,
        notes: "one machine whose input and output buffers are 120 m apart",
    },
    Scenario {
        name: "3-machines-loop",
        json: include_str!("../../scenarios/3-machines-loop.json"),
        agv_counts: &[1, 2, 3],
        score: None,
        notes: "route M1, M2, M1, M3 around a ring",
    },
    Scenario {
        name: "grid-2",
        json: include_str!("../../scenarios/grid-2.json"),
        agv_counts: &[1, 2, 3, 4],
        score: None,
        notes: "two rows of three machines, two part types",
    },
    Scenario {
        name: "grid-4",
        json: include_str!("../../scenarios/grid-4.json"),
        agv_counts: &[1, 2, 3, 4],
        score: None,
        notes: "two rows of three machines, two part types",
    },
    Scenario {
        name: "grid-6",
        json: include_str!("../../scenarios/grid-6.json"),
        agv_counts: &[1, 2, 3, 4],
        score: None,
        notes: "two rows of three machines, two part types",
    },
];

/// Expectations measured from a 12-hour cost-table run of `mayer` at
/// source clock 0.
const MAYER_SCORE: ScoreParams = ScoreParams {
    k: 4000.0,
    expected_parts: 862.0,
    expected_decisions: 2591.0,
    expected_seconds: 43200.0,
};

pub fn scenario(name: &str) -> Result<&'static Scenario> {
    SCENARIOS
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}
