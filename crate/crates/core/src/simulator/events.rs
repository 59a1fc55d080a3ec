use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

/// Event kinds in tie-break order at equal timestamps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Event {
    /// Infinite-server completion of a request that arrived at `arrived`.
    Departure {
        container: usize,
        arrived: f64,
    },
    /// Processor-sharing completion; stale unless `version` is current.
    SharedDeparture {
        container: usize,
        version: u64,
    },
    Monitor,
    Evaluation,
    /// Provisioning or deprovisioning step; stale unless `generation` is current.
    Provisioning {
        generation: u64,
    },
    Arrival,
}

impl Event {
    fn priority(&self) -> u8 {
        match self {
            Event::Departure { .. } | Event::SharedDeparture { .. } => 0,
            Event::Monitor => 1,
            Event::Evaluation => 2,
            Event::Provisioning { .. } => 3,
            Event::Arrival => 4,
        }
    }
}

#[derive(Debug)]
struct Scheduled {
    time: f64,
    priority: u8,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // Reversed so the max-heap pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.priority.cmp(&self.priority))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Future event list ordered by (time, priority, insertion order).
#[derive(Debug, Default)]
pub(crate) struct EventQueue {
    heap: BinaryHeap<Scheduled>,
    seq: u64,
}

impl EventQueue {
    pub(crate) fn push(&mut self, time: f64, event: Event) {
        self.seq += 1;
        self.heap.push(Scheduled {
            time,
            priority: event.priority(),
            seq: self.seq,
            event,
        });
    }

    pub(crate) fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|s| s.time)
    }

    pub(crate) fn pop(&mut self) -> Option<(f64, Event)> {
        self.heap.pop().map(|s| (s.time, s.event))
    }
}
