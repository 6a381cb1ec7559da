//! Discrete-event queue. The clock jumps from one scheduled event to the next;
//! nothing happens in between.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub type EventId = u64;

#[derive(Debug, Clone, PartialEq)]
pub struct Event<E> {
    pub id: EventId,
    pub time: f64,
    pub payload: E,
}

struct Entry<E>(Event<E>);

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .time
            .total_cmp(&other.0.time)
            .then(self.0.id.cmp(&other.0.id))
    }
}

/// Pending events ordered by `(time, id)`; ids are handed out in scheduling
/// order, so simultaneous events pop first-scheduled first.
pub struct EventQueue<E> {
    heap: BinaryHeap<Reverse<Entry<E>>>,
    clock: f64,
    next_id: EventId,
    popped: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            clock: 0.0,
            next_id: 0,
            popped: 0,
        }
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn schedule(&mut self, at: f64, payload: E) -> Result<EventId> {
        if at < self.clock || at.is_nan() {
            return Err(Error::TimeTravel {
                at,
                clock: self.clock,
            });
        }
        let id = self.next_id;
        self.next_id += 1;
        self.heap.push(Reverse(Entry(Event {
            id,
            time: at,
            payload,
        })));
        Ok(id)
    }

    /// Schedules `delay` seconds after the current clock.
    pub fn schedule_in(&mut self, delay: f64, payload: E) -> Result<EventId> {
        self.schedule(self.clock + delay, payload)
    }

    /// Removes the earliest event and advances the clock to its time.
    pub fn next_event(&mut self) -> Option<Event<E>> {
        let Reverse(Entry(event)) = self.heap.pop()?;
        self.clock = event.time;
        self.popped += 1;
        Some(event)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|Reverse(Entry(e))| e.time)
    }

    /// Moves the clock forward without popping (e.g. to a run horizon).
    pub fn advance_to(&mut self, t: f64) {
        if t > self.clock {
            self.clock = t;
        }
    }

    pub fn pending(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn scheduled(&self) -> u64 {
        self.next_id
    }

    pub fn popped(&self) -> u64 {
        self.popped
    }

    pub fn iter(&self) -> impl Iterator<Item = &Event<E>> {
        self.heap.iter().map(|Reverse(Entry(e))| e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_queue_yields_nothing() {
        let mut q: EventQueue<()> = EventQueue::new();
        assert!(q.next_event().is_none());
    }

    #[test]
    fn zero_delay_event_pops_next() {
        let mut q = EventQueue::new();
        q.schedule(5.0, "later").unwrap();
        q.next_event();
        q.schedule(5.0, "now").unwrap();
        q.schedule(6.0, "after").unwrap();
        assert_eq!(q.next_event().unwrap().payload, "now");
    }

    #[test]
    fn earlier_time_pops_first() {
        let mut q = EventQueue::new();
        q.schedule(10.0, 'A').unwrap();
        q.schedule(5.0, 'B').unwrap();
        assert_eq!(q.next_event().unwrap().payload, 'B');
        assert_eq!(q.next_event().unwrap().payload, 'A');
    }

    #[test]
    fn simultaneous_events_pop_in_scheduling_order() {
        let mut q = EventQueue::new();
        q.schedule(7.0, 'A').unwrap();
        q.schedule(7.0, 'B').unwrap();
        assert_eq!(q.next_event().unwrap().payload, 'A');
        assert_eq!(q.next_event().unwrap().payload, 'B');
    }

    #[test]
    fn clock_follows_popped_event() {
        let mut q = EventQueue::new();
        q.schedule(3.0, ()).unwrap();
        q.schedule(9.0, ()).unwrap();
        assert_eq!(q.next_event().unwrap().time, 3.0);
        assert_eq!(q.clock(), 3.0);
    }

    #[test]
    fn rejects_time_travel() {
        let mut q = EventQueue::new();
        q.schedule(4.0, ()).unwrap();
        q.next_event();
        assert!(matches!(q.schedule(3.9, ()), Err(Error::TimeTravel { .. })));
    }

    #[test]
    fn random_events_pop_in_sorted_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut q = EventQueue::new();
        let mut expected = Vec::new();
        for i in 0..1000u32 {
            // Coarse times so that ties are frequent.
            let t = rng.gen_range(0..200) as f64 * 0.5;
            let id = q.schedule(t, i).unwrap();
            expected.push((t, id, i));
        }
        expected.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let popped: Vec<_> = std::iter::from_fn(|| q.next_event())
            .map(|e| (e.time, e.id, e.payload))
            .collect();
        assert_eq!(popped, expected);
    }

    proptest! {
        #[test]
        fn clock_is_monotone_and_events_are_conserved(
            ops in proptest::collection::vec((0.0f64..50.0, any::<bool>()), 1..200)
        ) {
            let mut q = EventQueue::new();
            let mut last = 0.0;
            for (delay, pop) in ops {
                q.schedule_in(delay, ()).unwrap();
                if pop {
                    let e = q.next_event().unwrap();
                    prop_assert!(e.time >= last);
                    last = e.time;
                }
                prop_assert_eq!(q.scheduled(), q.popped() + q.pending() as u64);
            }
        }
    }
}
