//! Discrete-event core: virtual clock plus a priority queue of events
//! totally ordered by (fire_at, insertion sequence).

use crate::rng::NodeId;
use crate::time::SimTime;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("event scheduled in the past: fire_at {fire_at} < clock {now}")]
    SchedulePast { fire_at: SimTime, now: SimTime },
    #[error("protocol error at {at} on node {node}: {msg}")]
    Protocol {
        at: SimTime,
        node: NodeId,
        msg: String,
    },
    #[error("configuration error: {0}")]
    Config(String),
}

/// Event tags. Timer-like events carry the node's timer generation so that
/// a handler can discard timers armed before the node last changed state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Wakeup,
    ListenTimeout { gen: u64 },
    BeaconTick { gen: u64 },
    StrobeGiveUp { gen: u64 },
    PhaseTimeout { gen: u64 },
    TxEnd { tx_id: u64 },
    AppSend,
    MobilityTick,
    MetricsTick,
    SinkMigrate,
}

#[derive(Debug, Clone, Copy)]
pub struct SimEvent {
    pub fire_at: SimTime,
    pub seq: u64,
    pub target: NodeId,
    pub kind: EventKind,
}

impl PartialEq for SimEvent {
    fn eq(&self, other: &Self) -> bool {
        self.fire_at == other.fire_at && self.seq == other.seq
    }
}
impl Eq for SimEvent {}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want earliest first.
        other
            .fire_at
            .cmp(&self.fire_at)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Virtual clock and event queue.
#[derive(Debug, Default)]
pub struct EventQueue {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<SimEvent>,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn schedule(
        &mut self,
        fire_at: SimTime,
        target: NodeId,
        kind: EventKind,
    ) -> Result<(), SimError> {
        if fire_at < self.now {
            return Err(SimError::SchedulePast {
                fire_at,
                now: self.now,
            });
        }
        let ev = SimEvent {
            fire_at,
            seq: self.next_seq,
            target,
            kind,
        };
        self.next_seq += 1;
        self.heap.push(ev);
        Ok(())
    }

    /// Pops the next event with fire_at <= end, advancing the clock to it.
    /// Returns None once the queue holds nothing at or before `end`; the
    /// clock is then advanced to `end`.
    pub fn pop_until(&mut self, end: SimTime) -> Option<SimEvent> {
        match self.heap.peek() {
            Some(ev) if ev.fire_at <= end => {
                let ev = self.heap.pop().unwrap();
                debug_assert!(ev.fire_at >= self.now, "clock would go backwards");
                self.now = ev.fire_at;
                Some(ev)
            }
            _ => {
                self.now = end;
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drain(q: &mut EventQueue, end: SimTime) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        while let Some(ev) = q.pop_until(end) {
            out.push((ev.fire_at.as_micros(), ev.seq));
        }
        out
    }

    #[test]
    fn dispatch_in_time_order() {
        let mut q = EventQueue::new();
        q.schedule(SimTime(5), 0, EventKind::Wakeup).unwrap();
        q.schedule(SimTime(3), 0, EventKind::Wakeup).unwrap();
        let order = drain(&mut q, SimTime(10));
        assert_eq!(order.iter().map(|x| x.0).collect::<Vec<_>>(), vec![3, 5]);
        assert_eq!(q.now(), SimTime(10));
    }

    #[test]
    fn ties_break_by_insertion_order() {
        let mut q = EventQueue::new();
        q.schedule(SimTime(7), 1, EventKind::Wakeup).unwrap();
        q.schedule(SimTime(7), 2, EventKind::Wakeup).unwrap();
        q.schedule(SimTime(7), 3, EventKind::Wakeup).unwrap();
        let order = drain(&mut q, SimTime(10));
        assert_eq!(order, vec![(7, 0), (7, 1), (7, 2)]);
    }

    #[test]
    fn schedule_at_current_time_fires() {
        let mut q = EventQueue::new();
        q.schedule(SimTime(0), 0, EventKind::Wakeup).unwrap();
        assert!(q.pop_until(SimTime(10)).is_some());
    }

    #[test]
    fn schedule_in_past_is_fatal() {
        let mut q = EventQueue::new();
        q.schedule(SimTime(5), 0, EventKind::Wakeup).unwrap();
        assert!(q.pop_until(SimTime(10)).is_some());
        assert!(matches!(
            q.schedule(SimTime(4), 0, EventKind::Wakeup),
            Err(SimError::SchedulePast { .. })
        ));
    }

    #[test]
    fn empty_queue_advances_clock_to_end() {
        let mut q = EventQueue::new();
        assert!(q.pop_until(SimTime::from_secs(10)).is_none());
        assert_eq!(q.now(), SimTime::from_secs(10));
    }
}
