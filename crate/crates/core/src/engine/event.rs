//! Deterministic event queue: events dequeue in (time, insertion) order, so
//! two runs over the same inputs replay identically.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::topology::ApId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Packet index into the run's packet arena reaches its radio ingress.
    Arrival(usize),
    /// NR slot boundary.
    SlotBoundary(u64),
    /// Contention round on one AP's channel.
    WifiRound(ApId),
    /// Periodic measurement push toward the controller.
    MeasurementTick(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Entry {
    time_us: u64,
    seq: u64,
    kind: EventKind,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time_us, self.seq).cmp(&(other.time_us, other.seq))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Entry>>,
    next_seq: u64,
}

impl EventQueue {
    pub fn push(&mut self, time_us: u64, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Entry { time_us, seq, kind }));
    }

    pub fn pop(&mut self) -> Option<(u64, EventKind)> {
        self.heap.pop().map(|Reverse(e)| (e.time_us, e.kind))
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dequeues_in_time_then_insertion_order() {
        let mut q = EventQueue::default();
        q.push(10, EventKind::SlotBoundary(1));
        q.push(5, EventKind::Arrival(0));
        q.push(10, EventKind::Arrival(1));
        q.push(5, EventKind::Arrival(2));
        let order: Vec<(u64, EventKind)> = std::iter::from_fn(|| q.pop()).collect();
        assert_eq!(
            order,
            vec![
                (5, EventKind::Arrival(0)),
                (5, EventKind::Arrival(2)),
                (10, EventKind::SlotBoundary(1)),
                (10, EventKind::Arrival(1)),
            ]
        );
    }
}
