//! Observation layout.
//!
//! The vector is the concatenation of one block per AGV followed by one block
//! per station unit, both in config order (source output buffer; then input
//! buffer, production unit, output buffer of each machine; sink input buffer).
//!
//! AGV block: activity one-hot (6), carried-part block, drive-target one-hot
//! over buffer nodes (zero unless driving), last-visited-node one-hot over all
//! nodes.
//!
//! Unit block: activity one-hot (5), then `capacity` part blocks in FIFO order.
//!
//! Part block: type one-hot, completion in `[0, 1]`, next-station one-hot over
//! all stations. An absent part is all zeros.

use super::ObservationVector;
use crate::plant::Plant;
use crate::sim::{AgvActivity, Part, Simulation, UnitActivity};

/// Fraction of a part's drives and processing steps already done.
pub fn part_completion(part: &Part, plant: &Plant) -> f64 {
    let total = plant.part_types()[part.part_type].total_actions();
    part.actions_done as f64 / total as f64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationLayout {
    n_types: usize,
    n_stations: usize,
    n_nodes: usize,
    buffer_nodes: Vec<usize>,
    agv_offsets: Vec<usize>,
    unit_offsets: Vec<usize>,
    unit_capacities: Vec<usize>,
    len: usize,
}

impl ObservationLayout {
    pub fn new(plant: &Plant) -> Self {
        let mut layout = Self {
            n_types: plant.part_types().len(),
            n_stations: plant.stations().len(),
            n_nodes: plant.graph().len(),
            buffer_nodes: plant.buffer_nodes().to_vec(),
            agv_offsets: Vec::new(),
            unit_offsets: Vec::new(),
            unit_capacities: plant.units().iter().map(|u| u.capacity).collect(),
            len: 0,
        };
        let mut offset = 0;
        for _ in plant.agvs() {
            layout.agv_offsets.push(offset);
            offset += layout.agv_block_len();
        }
        for &cap in &layout.unit_capacities {
            layout.unit_offsets.push(offset);
            offset += layout.unit_block_len(cap);
        }
        layout.len = offset;
        layout
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn part_block_len(&self) -> usize {
        self.n_types + 1 + self.n_stations
    }

    pub fn agv_block_len(&self) -> usize {
        AgvActivity::ALL.len() + self.part_block_len() + self.buffer_nodes.len() + self.n_nodes
    }

    pub fn unit_block_len(&self, capacity: usize) -> usize {
        UnitActivity::ALL.len() + capacity * self.part_block_len()
    }

    fn write_part(&self, out: &mut [f64], part: &Part, sim: &Simulation) {
        out[part.part_type] = 1.0;
        out[self.n_types] = part_completion(part, sim.plant());
        out[self.n_types + 1 + sim.next_station(part)] = 1.0;
    }

    fn encode(&self, sim: &Simulation) -> ObservationVector {
        let mut v = vec![0.0; self.len];
        let state = sim.state();
        let p = self.part_block_len();
        for (agv, &base) in state.agvs.iter().zip(&self.agv_offsets) {
            let mut o = base;
            v[o + agv.activity.index()] = 1.0;
            o += AgvActivity::ALL.len();
            if let Some(part) = &agv.carried {
                self.write_part(&mut v[o..o + p], part, sim);
            }
            o += p;
            if let Some(target) = agv.target {
                if let Ok(i) = self.buffer_nodes.binary_search(&target) {
                    v[o + i] = 1.0;
                }
            }
            o += self.buffer_nodes.len();
            v[o + agv.last_node] = 1.0;
        }
        for (unit, &base) in state.units.iter().zip(&self.unit_offsets) {
            v[base + unit.activity().index()] = 1.0;
            let mut o = base + UnitActivity::ALL.len();
            for slot in unit.parts.iter().take(unit.capacity) {
                self.write_part(&mut v[o..o + p], &slot.part, sim);
                o += p;
            }
        }
        ObservationVector(v)
    }

    /// Recovers the symbolic content of an observation from the argmax of
    /// each populated one-hot block.
    pub fn decode(&self, obs: &[f64]) -> DecodedObservation {
        let p = self.part_block_len();
        let mut out = DecodedObservation::default();
        for &base in &self.agv_offsets {
            let mut o = base;
            out.agv_activities
                .push(one_hot(&obs[o..o + AgvActivity::ALL.len()]).map(|i| AgvActivity::ALL[i]));
            o += AgvActivity::ALL.len();
            out.agv_parts.push(self.decode_part(&obs[o..o + p]));
            o += p;
            out.agv_targets
                .push(one_hot(&obs[o..o + self.buffer_nodes.len()]).map(|i| self.buffer_nodes[i]));
            o += self.buffer_nodes.len();
            out.agv_last_nodes.push(one_hot(&obs[o..o + self.n_nodes]));
        }
        for (&base, &cap) in self.unit_offsets.iter().zip(&self.unit_capacities) {
            out.unit_activities.push(
                one_hot(&obs[base..base + UnitActivity::ALL.len()]).map(|i| UnitActivity::ALL[i]),
            );
            let o = base + UnitActivity::ALL.len();
            out.unit_parts.push(
                (0..cap)
                    .map(|k| self.decode_part(&obs[o + k * p..o + (k + 1) * p]))
                    .collect(),
            );
        }
        out
    }

    fn decode_part(&self, block: &[f64]) -> Option<DecodedPart> {
        let part_type = one_hot(&block[..self.n_types])?;
        Some(DecodedPart {
            part_type,
            completion: block[self.n_types],
            next_station: one_hot(&block[self.n_types + 1..])?,
        })
    }
}

fn one_hot(block: &[f64]) -> Option<usize> {
    block
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedPart {
    pub part_type: usize,
    pub completion: f64,
    pub next_station: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecodedObservation {
    pub agv_activities: Vec<Option<AgvActivity>>,
    pub agv_parts: Vec<Option<DecodedPart>>,
    pub agv_targets: Vec<Option<usize>>,
    pub agv_last_nodes: Vec<Option<usize>>,
    pub unit_activities: Vec<Option<UnitActivity>>,
    pub unit_parts: Vec<Vec<Option<DecodedPart>>>,
}

pub fn encode_observation(sim: &Simulation) -> ObservationVector {
    sim.layout().encode(sim)
}
