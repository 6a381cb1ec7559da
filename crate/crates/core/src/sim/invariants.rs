use super::{AgvActivity, Simulation};
use crate::plant::UnitKind;

impl Simulation {
    /// Lists every broken structural invariant of the current state. Used by
    /// the randomized invariant suite; an empty list means the state is sound.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut out = Vec::new();
        let plant = &self.plant;
        let state = &self.state;

        for (i, (unit, slot)) in state.units.iter().zip(plant.units()).enumerate() {
            let cap = match slot.kind {
                UnitKind::Production => 1,
                _ => slot.capacity,
            };
            if unit.occupancy() > cap {
                out.push(format!(
                    "unit {i} holds {} > capacity {cap}",
                    unit.occupancy()
                ));
            }
            if unit
                .parts
                .iter()
                .zip(unit.parts.iter().skip(1))
                .any(|(a, b)| a.since > b.since)
            {
                out.push(format!("unit {i} is not in arrival order"));
            }
        }

        for (i, agv) in state.agvs.iter().enumerate() {
            if (agv.activity == AgvActivity::Driving) != agv.target.is_some() {
                out.push(format!("AGV {i}: target set iff driving violated"));
            }
            if agv.carried.is_some() && agv.job.is_none() {
                out.push(format!("AGV {i} carries a part without a job"));
            }
        }

        let in_flight = self.parts_in_system().count() as u64;
        if state.released != in_flight + state.completed {
            out.push(format!(
                "part conservation: released {} != in flight {in_flight} + completed {}",
                state.released, state.completed
            ));
        }

        for part in self.parts_in_system() {
            let route = &plant.part_types()[part.part_type].route;
            let mut expected = vec![plant.source()];
            expected.extend(route);
            expected.push(plant.sink());
            if !expected.starts_with(&part.visited) {
                out.push(format!(
                    "part {} visited {:?}, route {:?}",
                    part.id, part.visited, expected
                ));
            }
            if part.route_cursor > route.len() {
                out.push(format!("part {} route cursor past the end", part.id));
            }
            let total = plant.part_types()[part.part_type].total_actions();
            if part.actions_done > total {
                out.push(format!("part {} has more actions than its route", part.id));
            }
        }

        let counters = self.counters();
        if counters.completion_sum + 1e-9 < counters.completed as f64 {
            out.push("completion sum below completed count".into());
        }
        if self.queue.clock() != state.clock && !self.done {
            out.push(format!(
                "sim clock {} differs from queue clock {}",
                state.clock,
                self.queue.clock()
            ));
        }
        out
    }
}
