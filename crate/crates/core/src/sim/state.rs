use std::collections::VecDeque;

use serde::Serialize;

pub type PartId = u64;

/// What an AGV is doing. Variant order is the observation one-hot order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AgvActivity {
    Driving,
    TransferringIn,
    TransferringOut,
    WaitingForOrder,
    WaitingToDropdown,
    WaitingToPickup,
}

impl AgvActivity {
    pub const ALL: [AgvActivity; 6] = [
        AgvActivity::Driving,
        AgvActivity::TransferringIn,
        AgvActivity::TransferringOut,
        AgvActivity::WaitingForOrder,
        AgvActivity::WaitingToDropdown,
        AgvActivity::WaitingToPickup,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// What a station unit is doing. Variant order is the observation one-hot order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum UnitActivity {
    Processing,
    TransferringIn,
    TransferringOut,
    WaitingToDropdown,
    WaitingToPickup,
}

impl UnitActivity {
    pub const ALL: [UnitActivity; 5] = [
        UnitActivity::Processing,
        UnitActivity::TransferringIn,
        UnitActivity::TransferringOut,
        UnitActivity::WaitingToDropdown,
        UnitActivity::WaitingToPickup,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub id: PartId,
    pub part_type: usize,
    /// Index of the next route step not yet processed.
    pub route_cursor: usize,
    /// Completed drives and processing steps.
    pub actions_done: usize,
    pub released_at: f64,
    /// Stations whose buffers the part has entered, source first.
    pub visited: Vec<usize>,
}

/// A part sitting in a unit, with the time it arrived there.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub part: Part,
    pub since: f64,
    /// AGV bound to pick this part up (output buffers only).
    pub claimed_by: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitState {
    pub capacity: usize,
    pub parts: VecDeque<Slot>,
    /// Slots reserved by transfers into this unit that have not finished.
    pub incoming: usize,
    /// Set while a transfer (or processing, for production units) is running.
    pub busy: Option<UnitActivity>,
}

impl UnitState {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            parts: VecDeque::with_capacity(capacity),
            incoming: 0,
            busy: None,
        }
    }

    pub fn occupancy(&self) -> usize {
        self.parts.len() + self.incoming
    }

    pub fn has_room(&self) -> bool {
        self.occupancy() < self.capacity
    }

    pub fn is_full(&self) -> bool {
        !self.has_room()
    }

    /// Busy state if any; an idle unit holding parts waits for them to be
    /// picked up, an idle empty unit waits for a drop.
    pub fn activity(&self) -> UnitActivity {
        match self.busy {
            Some(a) => a,
            None if self.parts.is_empty() => UnitActivity::WaitingToDropdown,
            None => UnitActivity::WaitingToPickup,
        }
    }

    pub fn first_unclaimed(&self) -> Option<&Slot> {
        self.parts.iter().find(|s| s.claimed_by.is_none())
    }
}

/// A transport job bound at assignment time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub pickup: usize,
    pub part: PartId,
    pub dest: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgvState {
    pub activity: AgvActivity,
    pub carried: Option<Part>,
    pub job: Option<Job>,
    /// Destination node, set only while driving.
    pub target: Option<usize>,
    pub last_node: usize,
    pub waiting_since: f64,
    /// Completion time of the running drive or transfer.
    pub busy_until: f64,
}

impl AgvState {
    pub fn is_inactive(&self) -> bool {
        self.activity == AgvActivity::WaitingForOrder
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Counters {
    /// Parts delivered to the sink.
    pub completed: u64,
    /// Sum of completion fractions over every released part.
    pub completion_sum: f64,
    /// Agent decisions that resulted in a job assignment.
    pub decisions: u64,
    pub time: f64,
}

/// Complete dynamic state of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub clock: f64,
    pub agvs: Vec<AgvState>,
    pub units: Vec<UnitState>,
    /// AGVs queued for a drop at each station's input buffer, in arrival order.
    pub drop_queues: Vec<VecDeque<usize>>,
    pub released: u64,
    pub completed: u64,
    pub decisions: u64,
    pub deadlocked: bool,
    pub stalled: bool,
}
