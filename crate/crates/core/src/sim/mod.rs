//! Plant dynamics: part release, transfers, processing, AGV driving, and the
//! controller that hands jobs from the agent to waiting AGVs.
//!
//! A run alternates between [`Simulation::step`] calls and event processing.
//! Events are popped until a decision point is reached: at least one AGV is
//! waiting for an order, some output buffer holds an unclaimed part, and an
//! event that can change the agent's options has fired since the last call.

mod deadlock;
mod invariants;
mod state;
mod trace;

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

pub use state::{
    AgvActivity, AgvState, Counters, Job, Part, PartId, SimState, Slot, UnitActivity, UnitState,
};
pub use trace::SharedBuffer;

use crate::agent::{
    encode_observation, score, ActionSpec, Decision, ObservationLayout, ObservationVector,
    ScoreParams,
};
use crate::des::{Event, EventQueue};
use crate::error::{Error, Result};
use crate::plant::{Plant, PlantConfig, StationKind};

pub const TWELVE_HOURS: f64 = 12.0 * 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Transfer {
    /// Output buffer to AGV.
    Pickup { agv: usize, station: usize },
    /// AGV to input buffer (or sink).
    Dropoff { agv: usize, station: usize },
    /// Input buffer to production unit.
    IntoProduction { station: usize },
    /// Production unit to output buffer.
    OutOfProduction { station: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SimEvent {
    PartReleased,
    DriveArrived { agv: usize },
    TransferDone(Transfer),
    ProcessingDone { station: usize },
    SourceClockTick,
}

impl SimEvent {
    pub fn kind(&self) -> &'static str {
        match self {
            SimEvent::PartReleased => "PartReleased",
            SimEvent::DriveArrived { .. } => "DriveArrived",
            SimEvent::TransferDone(_) => "TransferDone",
            SimEvent::ProcessingDone { .. } => "ProcessingDone",
            SimEvent::SourceClockTick => "SourceClockTick",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Release {
    Released(PartId),
    Blocked,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DispatchOutcome {
    Assigned { agv: usize, station: usize },
    Idle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub outcome: DispatchOutcome,
    pub clock: f64,
    pub deadlocked: bool,
    pub stalled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: ObservationVector,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Simulated seconds after which the run ends.
    pub horizon: f64,
    pub score: ScoreParams,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            horizon: TWELVE_HOURS,
            score: ScoreParams::default(),
        }
    }
}

pub struct Simulation {
    plant: Arc<Plant>,
    actions: ActionSpec,
    layout: ObservationLayout,
    options: SimOptions,
    state: SimState,
    queue: EventQueue<SimEvent>,
    env_rng: ChaCha8Rng,
    next_part: PartId,
    request_pending: bool,
    release_pending: bool,
    done: bool,
    trace: Option<Box<dyn Write + Send>>,
    decision_log: Option<Box<dyn Write + Send>>,
    io_error: Option<std::io::Error>,
}

impl Simulation {
    pub fn new(plant: Arc<Plant>, options: SimOptions) -> Self {
        let actions = ActionSpec::new(&plant);
        let layout = ObservationLayout::new(&plant);
        let state = Self::initial_state(&plant);
        Self {
            plant,
            actions,
            layout,
            options,
            state,
            queue: EventQueue::new(),
            env_rng: ChaCha8Rng::seed_from_u64(0),
            next_part: 0,
            request_pending: false,
            release_pending: false,
            done: false,
            trace: None,
            decision_log: None,
            io_error: None,
        }
    }

    /// Validates `config`, builds a simulation, and resets it.
    pub fn reset_from(
        config: PlantConfig,
        seed: u64,
        options: SimOptions,
    ) -> Result<(Self, ObservationVector)> {
        let mut sim = Self::new(Arc::new(Plant::new(config)?), options);
        let obs = sim.reset(seed);
        Ok((sim, obs))
    }

    fn initial_state(plant: &Plant) -> SimState {
        SimState {
            clock: 0.0,
            agvs: plant
                .agvs()
                .iter()
                .map(|a| AgvState {
                    activity: AgvActivity::WaitingForOrder,
                    carried: None,
                    job: None,
                    target: None,
                    last_node: a.start_node,
                    waiting_since: 0.0,
                    busy_until: 0.0,
                })
                .collect(),
            units: plant
                .units()
                .iter()
                .map(|u| UnitState::new(u.capacity))
                .collect(),
            drop_queues: vec![Default::default(); plant.stations().len()],
            released: 0,
            completed: 0,
            decisions: 0,
            deadlocked: false,
            stalled: false,
        }
    }

    /// Restarts the run and advances to the first decision point.
    pub fn reset(&mut self, seed: u64) -> ObservationVector {
        self.state = Self::initial_state(&self.plant);
        self.queue = EventQueue::new();
        self.env_rng = ChaCha8Rng::seed_from_u64(seed);
        self.next_part = 0;
        self.release_pending = false;
        self.done = false;
        self.request_pending = true;
        if self.plant.source_clock() > 0.0 {
            self.schedule(0.0, SimEvent::SourceClockTick);
        }
        self.progress();
        self.advance();
        self.observe()
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn plant_arc(&self) -> Arc<Plant> {
        Arc::clone(&self.plant)
    }

    pub fn actions(&self) -> &ActionSpec {
        &self.actions
    }

    pub fn layout(&self) -> &ObservationLayout {
        &self.layout
    }

    pub fn options(&self) -> &SimOptions {
        &self.options
    }

    pub fn set_horizon(&mut self, horizon: f64) {
        self.options.horizon = horizon;
    }

    pub fn set_score_params(&mut self, params: ScoreParams) {
        self.options.score = params;
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn clock(&self) -> f64 {
        self.state.clock
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn is_deadlocked(&self) -> bool {
        self.state.deadlocked
    }

    pub fn pending_events(&self) -> usize {
        self.queue.pending()
    }

    /// True when the agent is expected to act.
    pub fn decision_pending(&self) -> bool {
        !self.done && self.request_pending
    }

    pub fn counters(&self) -> Counters {
        let plant = &self.plant;
        let mut completion_sum = self.state.completed as f64;
        for part in self.parts_in_system() {
            let total = plant.part_types()[part.part_type].total_actions();
            completion_sum += part.actions_done as f64 / total as f64;
        }
        Counters {
            completed: self.state.completed,
            completion_sum,
            decisions: self.state.decisions,
            time: self.state.clock,
        }
    }

    pub fn score(&self) -> f64 {
        score(&self.counters(), self.state.deadlocked, &self.options.score)
    }

    pub fn observe(&self) -> ObservationVector {
        encode_observation(self)
    }

    /// Writes one JSON line per popped event.
    pub fn set_trace(&mut self, sink: Box<dyn Write + Send>) {
        self.trace = Some(sink);
    }

    /// Writes one JSON line per agent decision.
    pub fn set_decision_log(&mut self, sink: Box<dyn Write + Send>) {
        self.decision_log = Some(sink);
    }

    /// Flushes the trace and decision log and reports the first write error.
    pub fn flush_logs(&mut self) -> std::io::Result<()> {
        if let Some(e) = self.io_error.take() {
            return Err(e);
        }
        if let Some(t) = self.trace.as_mut() {
            t.flush()?;
        }
        if let Some(d) = self.decision_log.as_mut() {
            d.flush()?;
        }
        Ok(())
    }

    /// Every part released and not yet at the sink.
    pub fn parts_in_system(&self) -> impl Iterator<Item = &Part> {
        self.state
            .units
            .iter()
            .flat_map(|u| u.parts.iter().map(|s| &s.part))
            .chain(self.state.agvs.iter().filter_map(|a| a.carried.as_ref()))
    }

    /// Next station a part must visit: its next route step, or the sink.
    pub fn next_station(&self, part: &Part) -> usize {
        let route = &self.plant.part_types()[part.part_type].route;
        route
            .get(part.route_cursor)
            .copied()
            .unwrap_or(self.plant.sink())
    }

    pub fn inactive_agvs(&self) -> impl Iterator<Item = usize> + '_ {
        self.state
            .agvs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_inactive())
            .map(|(i, _)| i)
    }

    /// Pickup stations whose output buffer holds an unclaimed part, with the
    /// arrival time of the oldest such part.
    pub fn waiting_stations(&self) -> Vec<(usize, f64)> {
        self.plant
            .pickup_stations()
            .iter()
            .filter_map(|&s| {
                let ob = self.plant.station(s).output_unit?;
                self.state.units[ob]
                    .first_unclaimed()
                    .map(|slot| (s, slot.since))
            })
            .collect()
    }

    pub fn output_unit(&self, station: usize) -> Option<&UnitState> {
        self.plant
            .station(station)
            .output_unit
            .map(|u| &self.state.units[u])
    }

    /// Seconds until `agv` could be at `station`'s output node: direct drive
    /// for an inactive AGV, otherwise the rest of its job plus the drive from
    /// the job's drop node.
    pub fn estimate_time_to_station(&self, agv: usize, station: usize) -> Result<f64> {
        let t = self.eta(agv, station);
        if t.is_finite() {
            Ok(t)
        } else {
            let from = self.state.agvs[agv]
                .job
                .and_then(|j| self.plant.station(j.dest).input_node)
                .unwrap_or(self.state.agvs[agv].last_node);
            Err(Error::Unreachable {
                from: self.plant.node_id(from).to_string(),
                to: self.plant.station(station).id.clone(),
            })
        }
    }

    pub(crate) fn eta(&self, agv: usize, station: usize) -> f64 {
        let Some(target) = self.plant.station(station).output_node else {
            return f64::INFINITY;
        };
        let a = &self.state.agvs[agv];
        let speed = self.plant.agvs()[agv].speed;
        let drive = |from: usize, to: usize| self.plant.distance(from, to) / speed;
        let Some(job) = a.job else {
            return drive(a.last_node, target);
        };
        let transfer = self.plant.transfer_time();
        let pickup_node = self.plant.station(job.pickup).output_node.unwrap();
        let drop_node = self.plant.station(job.dest).input_node.unwrap();
        let running = (a.busy_until - self.state.clock).max(0.0);
        let loaded_leg = drive(pickup_node, drop_node);
        let remaining = match (a.activity, a.carried.is_some()) {
            (AgvActivity::Driving, false) => running + transfer + loaded_leg + transfer,
            (AgvActivity::WaitingToPickup, _) => transfer + loaded_leg + transfer,
            (AgvActivity::TransferringIn, _) => running + loaded_leg + transfer,
            (AgvActivity::Driving, true) => running + transfer,
            (AgvActivity::WaitingToDropdown, _) => transfer,
            (AgvActivity::TransferringOut, _) => running,
            (AgvActivity::WaitingForOrder, _) => 0.0,
        };
        remaining + drive(drop_node, target)
    }

    /// Applies the agent's decision and runs events until the next decision
    /// point, a deadlock, or the horizon.
    pub fn step(&mut self, decision: impl Into<Decision>) -> Result<Transition> {
        let decision = decision.into();
        if decision.action >= self.actions.count() {
            return Err(Error::ActionOutOfRange {
                index: decision.action,
                count: self.actions.count(),
            });
        }
        if !self.decision_pending() {
            return Err(Error::NoPendingDecision);
        }
        let before = self.score();
        let waiting: Vec<usize> = self.inactive_agvs().collect();
        let outcome = self.controller_dispatch(decision);
        self.log_decision(&waiting, decision, outcome);
        if outcome == DispatchOutcome::Idle {
            self.request_pending = false;
        }
        self.progress();
        self.advance();
        let reward = self.score() - before;
        Ok(Transition {
            observation: self.observe(),
            reward,
            done: self.done,
            info: StepInfo {
                outcome,
                clock: self.state.clock,
                deadlocked: self.state.deadlocked,
                stalled: self.state.stalled,
            },
        })
    }

    /// Hands the job at the chosen station to a waiting AGV: the pinned one
    /// if it is waiting, otherwise the one that reaches the station first
    /// (lowest index on ties). Anything that cannot be assigned is a no-op.
    pub fn controller_dispatch(&mut self, decision: Decision) -> DispatchOutcome {
        let Some(station) = self.actions.station(decision.action) else {
            return DispatchOutcome::Idle;
        };
        let Some(ob) = self.plant.station(station).output_unit else {
            return DispatchOutcome::Idle;
        };
        let Some(slot) = self.state.units[ob].first_unclaimed() else {
            return DispatchOutcome::Idle;
        };
        let part_id = slot.part.id;
        let dest = self.next_station(&slot.part);

        let pinned = decision
            .assignee
            .filter(|&a| a < self.state.agvs.len() && self.state.agvs[a].is_inactive());
        let agv = match pinned {
            Some(a) => a,
            None => {
                let best = self
                    .inactive_agvs()
                    .map(|a| (a, self.eta(a, station)))
                    .filter(|(_, t)| t.is_finite())
                    .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
                match best {
                    Some((a, _)) => a,
                    None => return DispatchOutcome::Idle,
                }
            }
        };

        let pickup_node = self.plant.station(station).output_node.unwrap();
        let distance = self
            .plant
            .distance(self.state.agvs[agv].last_node, pickup_node);
        if !distance.is_finite() {
            return DispatchOutcome::Idle;
        }
        for slot in self.state.units[ob].parts.iter_mut() {
            if slot.part.id == part_id {
                slot.claimed_by = Some(agv);
            }
        }
        self.state.decisions += 1;
        let job = Job {
            pickup: station,
            part: part_id,
            dest,
        };
        self.start_drive(agv, pickup_node, distance);
        self.state.agvs[agv].job = Some(job);
        DispatchOutcome::Assigned { agv, station }
    }

    /// Appends a part of a uniformly drawn type to the source output buffer,
    /// or reports that the buffer is full.
    pub fn release_part(&mut self) -> Release {
        let ob = self.plant.station(self.plant.source()).output_unit.unwrap();
        if !self.state.units[ob].has_room() {
            return Release::Blocked;
        }
        let n_types = self.plant.part_types().len();
        let part_type = self.env_rng.gen_range(0..n_types);
        let id = self.next_part;
        self.next_part += 1;
        self.state.released += 1;
        self.state.units[ob].parts.push_back(Slot {
            part: Part {
                id,
                part_type,
                route_cursor: 0,
                actions_done: 0,
                released_at: self.state.clock,
                visited: vec![self.plant.source()],
            },
            since: self.state.clock,
            claimed_by: None,
        });
        self.raise();
        Release::Released(id)
    }

    fn raise(&mut self) {
        self.request_pending = true;
    }

    fn decision_possible(&self) -> bool {
        self.state.agvs.iter().any(AgvState::is_inactive)
            && self.plant.pickup_stations().iter().any(|&s| {
                self.output_unit(s)
                    .is_some_and(|u| u.first_unclaimed().is_some())
            })
    }

    fn advance(&mut self) {
        loop {
            if self.state.deadlocked || self.state.clock >= self.options.horizon {
                self.done = true;
                return;
            }
            if self.request_pending {
                if self.decision_possible() {
                    return;
                }
                self.request_pending = false;
            }
            if self.frozen() {
                // The agent declined every job and nothing else can happen.
                self.state.deadlocked = true;
                self.state.stalled = true;
                self.done = true;
                return;
            }
            match self.queue.peek_time() {
                None => {
                    self.queue.advance_to(self.options.horizon);
                    self.state.clock = self.options.horizon;
                    self.done = true;
                    return;
                }
                Some(t) if t > self.options.horizon => {
                    self.queue.advance_to(self.options.horizon);
                    self.state.clock = self.options.horizon;
                    self.done = true;
                    return;
                }
                Some(_) => {
                    let event = self.queue.next_event().expect("peeked");
                    self.state.clock = event.time;
                    self.write_trace(&event);
                    self.handle(event.payload);
                    self.progress();
                    if self.blocked_cycle() {
                        self.state.deadlocked = true;
                    }
                }
            }
        }
    }

    fn schedule(&mut self, delay: f64, event: SimEvent) -> f64 {
        let at = self.state.clock + delay;
        self.queue
            .schedule(at, event)
            .expect("delays are nonnegative");
        at
    }

    fn jitter(&mut self, delta: f64) -> f64 {
        if delta > 0.0 {
            self.env_rng.gen_range(1.0 - delta..=1.0 + delta)
        } else {
            1.0
        }
    }

    fn transfer_delay(&mut self) -> f64 {
        let d = self.plant.noise().transfer;
        self.plant.transfer_time() * self.jitter(d)
    }

    fn start_drive(&mut self, agv: usize, target: usize, distance: f64) {
        let speed = self.plant.agvs()[agv].speed;
        let d = self.plant.noise().drive;
        let delay = distance / speed * self.jitter(d);
        let until = self.schedule(delay, SimEvent::DriveArrived { agv });
        let a = &mut self.state.agvs[agv];
        a.activity = AgvActivity::Driving;
        a.target = Some(target);
        a.busy_until = until;
    }

    fn handle(&mut self, event: SimEvent) {
        match event {
            SimEvent::SourceClockTick => {
                self.release_part();
                let d = self.plant.noise().source_clock;
                let delay = self.plant.source_clock() * self.jitter(d);
                self.schedule(delay, SimEvent::SourceClockTick);
            }
            SimEvent::PartReleased => {
                self.release_pending = false;
                self.release_part();
            }
            SimEvent::DriveArrived { agv } => {
                let a = &mut self.state.agvs[agv];
                a.last_node = a.target.take().expect("driving AGV has a target");
                let job = a.job.expect("driving AGV has a job");
                if a.carried.is_some() {
                    a.activity = AgvActivity::WaitingToDropdown;
                    self.state.drop_queues[job.dest].push_back(agv);
                } else {
                    a.activity = AgvActivity::WaitingToPickup;
                }
            }
            SimEvent::TransferDone(t) => self.finish_transfer(t),
            SimEvent::ProcessingDone { station } => {
                let pu = self.plant.station(station).production_unit.unwrap();
                let unit = &mut self.state.units[pu];
                unit.busy = None;
                let part = &mut unit.parts[0].part;
                part.actions_done += 1;
                part.route_cursor += 1;
            }
        }
    }

    fn finish_transfer(&mut self, transfer: Transfer) {
        let now = self.state.clock;
        match transfer {
            Transfer::Pickup { agv, station } => {
                let ob = self.plant.station(station).output_unit.unwrap();
                let unit = &mut self.state.units[ob];
                unit.busy = None;
                let slot = unit.parts.pop_front().expect("picked part present");
                let job = self.state.agvs[agv].job.expect("picking AGV has a job");
                debug_assert_eq!(slot.part.id, job.part);
                self.state.agvs[agv].carried = Some(slot.part);
                let from = self.state.agvs[agv].last_node;
                let to = self.plant.station(job.dest).input_node.unwrap();
                let distance = self.plant.distance(from, to);
                self.start_drive(agv, to, distance);
                self.raise();
            }
            Transfer::Dropoff { agv, station } => {
                let a = &mut self.state.agvs[agv];
                let mut part = a.carried.take().expect("dropping AGV carries a part");
                a.job = None;
                a.activity = AgvActivity::WaitingForOrder;
                a.waiting_since = now;
                part.actions_done += 1;
                part.visited.push(station);
                let ib = self.plant.station(station).input_unit.unwrap();
                let unit = &mut self.state.units[ib];
                unit.busy = None;
                unit.incoming -= 1;
                if station == self.plant.sink() {
                    self.state.completed += 1;
                } else {
                    unit.parts.push_back(Slot {
                        part,
                        since: now,
                        claimed_by: None,
                    });
                }
                self.raise();
            }
            Transfer::IntoProduction { station } => {
                let s = self.plant.station(station);
                let (ib, pu) = (s.input_unit.unwrap(), s.production_unit.unwrap());
                let processing = s.processing_time;
                let input = &mut self.state.units[ib];
                input.busy = None;
                let mut slot = input.parts.pop_front().expect("part entering production");
                slot.since = now;
                let unit = &mut self.state.units[pu];
                unit.incoming -= 1;
                unit.parts.push_back(slot);
                unit.busy = Some(UnitActivity::Processing);
                let d = self.plant.noise().processing;
                let delay = processing * self.jitter(d);
                self.schedule(delay, SimEvent::ProcessingDone { station });
                self.raise();
            }
            Transfer::OutOfProduction { station } => {
                let s = self.plant.station(station);
                let (pu, ob) = (s.production_unit.unwrap(), s.output_unit.unwrap());
                let unit = &mut self.state.units[pu];
                unit.busy = None;
                let mut slot = unit.parts.pop_front().expect("finished part present");
                slot.since = now;
                let output = &mut self.state.units[ob];
                output.busy = None;
                output.incoming -= 1;
                output.parts.push_back(slot);
                self.raise();
            }
        }
    }

    /// Starts every transfer that has become possible.
    fn progress(&mut self) {
        loop {
            let mut changed = false;
            for s in 0..self.plant.stations().len() {
                changed |= self.try_machine(s);
            }
            for agv in 0..self.state.agvs.len() {
                changed |= self.try_pickup(agv);
            }
            for s in 0..self.plant.stations().len() {
                changed |= self.try_dropoff(s);
            }
            if !changed {
                break;
            }
        }
        if self.plant.source_clock() <= 0.0 && !self.release_pending {
            let ob = self.plant.station(self.plant.source()).output_unit.unwrap();
            if self.state.units[ob].has_room() {
                self.release_pending = true;
                self.schedule(0.0, SimEvent::PartReleased);
            }
        }
    }

    fn try_machine(&mut self, station: usize) -> bool {
        let s = self.plant.station(station);
        if s.kind != StationKind::Machine {
            return false;
        }
        let (ib, pu, ob) = (
            s.input_unit.unwrap(),
            s.production_unit.unwrap(),
            s.output_unit.unwrap(),
        );
        let units = &self.state.units;
        if units[pu].busy.is_none()
            && units[pu].occupancy() == 0
            && units[ib].busy.is_none()
            && !units[ib].parts.is_empty()
        {
            self.state.units[ib].busy = Some(UnitActivity::TransferringOut);
            self.state.units[pu].busy = Some(UnitActivity::TransferringIn);
            self.state.units[pu].incoming += 1;
            let delay = self.transfer_delay();
            self.schedule(
                delay,
                SimEvent::TransferDone(Transfer::IntoProduction { station }),
            );
            return true;
        }
        let units = &self.state.units;
        if units[pu].busy.is_none()
            && !units[pu].parts.is_empty()
            && units[ob].busy.is_none()
            && units[ob].has_room()
        {
            self.state.units[pu].busy = Some(UnitActivity::TransferringOut);
            self.state.units[ob].busy = Some(UnitActivity::TransferringIn);
            self.state.units[ob].incoming += 1;
            let delay = self.transfer_delay();
            self.schedule(
                delay,
                SimEvent::TransferDone(Transfer::OutOfProduction { station }),
            );
            return true;
        }
        false
    }

    fn try_pickup(&mut self, agv: usize) -> bool {
        let a = &self.state.agvs[agv];
        if a.activity != AgvActivity::WaitingToPickup {
            return false;
        }
        let job = a.job.expect("waiting AGV has a job");
        let ob = self.plant.station(job.pickup).output_unit.unwrap();
        let unit = &self.state.units[ob];
        if unit.busy.is_some() || unit.parts.front().map(|s| s.part.id) != Some(job.part) {
            return false;
        }
        self.state.units[ob].busy = Some(UnitActivity::TransferringOut);
        let delay = self.transfer_delay();
        let until = self.schedule(
            delay,
            SimEvent::TransferDone(Transfer::Pickup {
                agv,
                station: job.pickup,
            }),
        );
        let a = &mut self.state.agvs[agv];
        a.activity = AgvActivity::TransferringIn;
        a.busy_until = until;
        true
    }

    fn try_dropoff(&mut self, station: usize) -> bool {
        let Some(&agv) = self.state.drop_queues[station].front() else {
            return false;
        };
        let ib = self.plant.station(station).input_unit.unwrap();
        let is_sink = station == self.plant.sink();
        let unit = &self.state.units[ib];
        if unit.busy.is_some() || (!is_sink && !unit.has_room()) {
            return false;
        }
        self.state.drop_queues[station].pop_front();
        let unit = &mut self.state.units[ib];
        unit.busy = Some(UnitActivity::TransferringIn);
        unit.incoming += 1;
        let delay = self.transfer_delay();
        let until = self.schedule(
            delay,
            SimEvent::TransferDone(Transfer::Dropoff { agv, station }),
        );
        let a = &mut self.state.agvs[agv];
        a.activity = AgvActivity::TransferringOut;
        a.busy_until = until;
        true
    }

    fn write_trace(&mut self, event: &Event<SimEvent>) {
        let Some(out) = self.trace.as_mut() else {
            return;
        };
        let plant = &self.plant;
        let payload = match event.payload {
            SimEvent::PartReleased | SimEvent::SourceClockTick => json!({}),
            SimEvent::DriveArrived { agv } => json!({ "agv": plant.agvs()[agv].id }),
            SimEvent::ProcessingDone { station } => json!({ "station": plant.station(station).id }),
            SimEvent::TransferDone(t) => match t {
                Transfer::Pickup { agv, station } => json!({
                    "transfer": "pickup", "agv": plant.agvs()[agv].id, "station": plant.station(station).id
                }),
                Transfer::Dropoff { agv, station } => json!({
                    "transfer": "dropoff", "agv": plant.agvs()[agv].id, "station": plant.station(station).id
                }),
                Transfer::IntoProduction { station } => json!({
                    "transfer": "into_production", "station": plant.station(station).id
                }),
                Transfer::OutOfProduction { station } => json!({
                    "transfer": "out_of_production", "station": plant.station(station).id
                }),
            },
        };
        let line = json!({
            "t": event.time,
            "id": event.id,
            "kind": event.payload.kind(),
            "payload": payload,
        });
        if let Err(e) = writeln!(out, "{line}") {
            self.io_error.get_or_insert(e);
        }
    }

    fn log_decision(&mut self, waiting: &[usize], decision: Decision, outcome: DispatchOutcome) {
        let Some(out) = self.decision_log.as_mut() else {
            return;
        };
        let plant = &self.plant;
        let waiting: Vec<&str> = waiting
            .iter()
            .map(|&a| plant.agvs()[a].id.as_str())
            .collect();
        let action = match self.actions.station(decision.action) {
            Some(s) => plant.station(s).id.as_str(),
            None => "do_nothing",
        };
        let assigned = match outcome {
            DispatchOutcome::Assigned { agv, .. } => Some(plant.agvs()[agv].id.as_str()),
            DispatchOutcome::Idle => None,
        };
        let line = json!({
            "t": self.state.clock,
            "waiting_agvs": waiting,
            "action": action,
            "assigned_agv": assigned,
        });
        if let Err(e) = writeln!(out, "{line}") {
            self.io_error.get_or_insert(e);
        }
    }
}
