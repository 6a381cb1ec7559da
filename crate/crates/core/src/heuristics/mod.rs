//! Deterministic dispatch baselines.
//!
//! `S_longest` is the station whose output buffer holds the part that has
//! waited longest (ties: lowest station index); `AGV_longest` is the inactive
//! AGV that has waited longest for an order (ties: lowest AGV index).

mod lsa;

pub use lsa::{linear_sum_assignment, Assignment};

use crate::agent::{Agent, Decision, ObservationVector};
use crate::sim::Simulation;

/// Cost used for unreachable AGV/station pairs inside the assignment solver.
const UNREACHABLE_COST: f64 = 1e15;

fn longest_waiting_station(sim: &Simulation) -> Option<usize> {
    oldest(&sim.waiting_stations())
}

/// Key of the entry with the earliest timestamp, lowest key on ties.
pub fn oldest(entries: &[(usize, f64)]) -> Option<usize> {
    entries
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|&(k, _)| k)
}

fn longest_waiting_agv(sim: &Simulation, among: impl Iterator<Item = usize>) -> Option<usize> {
    let agvs = &sim.state().agvs;
    among.min_by(|&a, &b| {
        agvs[a]
            .waiting_since
            .total_cmp(&agvs[b].waiting_since)
            .then(a.cmp(&b))
    })
}

fn do_nothing(sim: &Simulation) -> Decision {
    Decision::new(sim.actions().do_nothing())
}

fn pickup(sim: &Simulation, station: usize) -> usize {
    sim.actions()
        .index_of(station)
        .expect("waiting stations are pickup stations")
}

/// `S_longest` for `AGV_longest`.
pub fn fifo_act(sim: &Simulation) -> Decision {
    let Some(station) = longest_waiting_station(sim) else {
        return do_nothing(sim);
    };
    match longest_waiting_agv(sim, sim.inactive_agvs()) {
        Some(agv) => Decision::pinned(pickup(sim, station), agv),
        None => do_nothing(sim),
    }
}

/// `S_longest`, but only if the AGV that can be there soonest (counting the
/// rest of an active AGV's job) is currently inactive.
pub fn nearest_neighbor_act(sim: &Simulation) -> Decision {
    let Some(station) = longest_waiting_station(sim) else {
        return do_nothing(sim);
    };
    let etas: Vec<f64> = (0..sim.state().agvs.len())
        .map(|a| sim.eta(a, station))
        .collect();
    match fastest(&etas) {
        Some(agv) if sim.state().agvs[agv].is_inactive() => Decision::new(pickup(sim, station)),
        _ => do_nothing(sim),
    }
}

/// Index of the smallest finite estimate, lowest index on ties.
pub fn fastest(etas: &[f64]) -> Option<usize> {
    etas.iter()
        .enumerate()
        .filter(|(_, t)| t.is_finite())
        .min_by(|x, y| x.1.total_cmp(y.1).then(x.0.cmp(&y.0)))
        .map(|(i, _)| i)
}

/// Estimated seconds for each inactive AGV (rows) to reach each waiting
/// station (columns). Unreachable cells are `INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    pub agvs: Vec<usize>,
    pub stations: Vec<usize>,
    pub cells: Vec<Vec<f64>>,
}

impl CostTable {
    pub fn build(sim: &Simulation) -> Self {
        let agvs: Vec<usize> = sim.inactive_agvs().collect();
        let stations: Vec<usize> = sim.waiting_stations().into_iter().map(|(s, _)| s).collect();
        let cells = agvs
            .iter()
            .map(|&a| stations.iter().map(|&s| sim.eta(a, s)).collect())
            .collect();
        Self {
            agvs,
            stations,
            cells,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.agvs.is_empty() || self.stations.is_empty()
    }
}

/// Solves the cost table and returns the solution pair whose AGV has waited
/// longest, pinned to that AGV.
pub fn cost_table_act(sim: &Simulation) -> Decision {
    let table = CostTable::build(sim);
    if table.is_empty() {
        return do_nothing(sim);
    }
    match choose_from_table(sim, &table) {
        Some((agv, station)) => Decision::pinned(pickup(sim, station), agv),
        None => do_nothing(sim),
    }
}

fn choose_from_table(sim: &Simulation, table: &CostTable) -> Option<(usize, usize)> {
    let agvs = &sim.state().agvs;
    let since: Vec<f64> = table.agvs.iter().map(|&a| agvs[a].waiting_since).collect();
    let (r, c) = select_pair(&table.cells, &since)?;
    Some((table.agvs[r], table.stations[c]))
}

/// Solves `cells` (rows: AGVs, columns: stations; `INFINITY` means
/// unreachable) and returns the solution pair whose row has the smallest
/// `waiting_since`, lowest row on ties.
pub fn select_pair(cells: &[Vec<f64>], waiting_since: &[f64]) -> Option<(usize, usize)> {
    let finite: Vec<Vec<f64>> = cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|&c| if c.is_finite() { c } else { UNREACHABLE_COST })
                .collect()
        })
        .collect();
    let solution = linear_sum_assignment(&finite).ok()?;
    solution
        .pairs
        .into_iter()
        .filter(|&(r, c)| cells[r][c].is_finite())
        .min_by(|a, b| {
            waiting_since[a.0]
                .total_cmp(&waiting_since[b.0])
                .then(a.0.cmp(&b.0))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    Fifo,
    NearestNeighbor,
    CostTable,
}

impl Heuristic {
    pub const ALL: [Heuristic; 3] = [
        Heuristic::Fifo,
        Heuristic::NearestNeighbor,
        Heuristic::CostTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::Fifo => "fifo",
            Heuristic::NearestNeighbor => "nn",
            Heuristic::CostTable => "cost-table",
        }
    }

    pub fn act(self, sim: &Simulation) -> Decision {
        match self {
            Heuristic::Fifo => fifo_act(sim),
            Heuristic::NearestNeighbor => nearest_neighbor_act(sim),
            Heuristic::CostTable => cost_table_act(sim),
        }
    }
}

impl Agent for Heuristic {
    fn name(&self) -> &str {
        Heuristic::name(*self)
    }

    fn act(&mut self, sim: &Simulation, _observation: &ObservationVector) -> Decision {
        Heuristic::act(*self, sim)
    }
}

#[cfg(test)]
mod tests;
