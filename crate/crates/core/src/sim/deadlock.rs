use super::{AgvActivity, SimEvent, Simulation};
use crate::plant::StationKind;

impl Simulation {
    /// True when the run can make no further progress: either every AGV
    /// waits to drop into a machine that can only drain through an AGV
    /// pickup, or the agent left the plant frozen.
    pub fn detect_deadlock(&self) -> bool {
        self.blocked_cycle() || (!self.request_pending && self.frozen())
    }

    /// Parts remain, and nothing that could change the state is scheduled:
    /// the queue is empty or holds only source ticks that will find the
    /// source buffer full. No new decision request can arise from here.
    pub(crate) fn frozen(&self) -> bool {
        if self.parts_in_system().next().is_none() {
            return false;
        }
        if self.queue.is_empty() {
            return true;
        }
        let source_full = self
            .output_unit(self.plant.source())
            .is_some_and(|u| !u.has_room());
        source_full
            && self
                .queue
                .iter()
                .all(|e| e.payload == SimEvent::SourceClockTick)
    }

    /// Wait-for cycle: AGV holding a part -> full input buffer -> production
    /// unit holding a finished part -> full output buffer -> any AGV. The
    /// cycle closes only when no AGV is free to empty an output buffer.
    pub(crate) fn blocked_cycle(&self) -> bool {
        let agvs = &self.state.agvs;
        !agvs.is_empty()
            && agvs.iter().all(|a| {
                a.activity == AgvActivity::WaitingToDropdown
                    && a.job.is_some_and(|job| self.machine_jammed(job.dest))
            })
    }

    /// The input buffer is full and cannot drain until an AGV takes a part
    /// from the output buffer.
    fn machine_jammed(&self, station: usize) -> bool {
        let s = self.plant.station(station);
        if s.kind != StationKind::Machine {
            return false;
        }
        let units = &self.state.units;
        let ib = &units[s.input_unit.unwrap()];
        let pu = &units[s.production_unit.unwrap()];
        let ob = &units[s.output_unit.unwrap()];
        ib.busy.is_none()
            && ib.is_full()
            && pu.busy.is_none()
            && pu.parts.len() == 1
            && ob.busy.is_none()
            && ob.is_full()
    }
}
