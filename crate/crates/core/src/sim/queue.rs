use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Arrival { task: u32 },
    MonitorTick { tick: u64 },
    FailureStart { device: u32 },
    FailureEnd { device: u32 },
    TaskDone { task: u32, epoch: u64 },
    MigrationDone { task: u32, epoch: u64 },
    CheckpointDone { task: u32, epoch: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEvent {
    pub time_s: f64,
    pub seq: u64,
    pub kind: EventKind,
}

impl Eq for SimEvent {}

impl Ord for SimEvent {
    // Reversed so the max-heap pops the earliest (time, seq) first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time_s
            .total_cmp(&self.time_s)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Events in `(time, insertion sequence)` order.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<SimEvent>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time_s: f64, kind: EventKind) -> u64 {
        debug_assert!(!time_s.is_nan());
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(SimEvent { time_s, seq, kind });
        seq
    }

    pub fn pop(&mut self) -> Option<SimEvent> {
        self.heap.pop()
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time_s)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Sequence numbers handed out so far.
    pub fn inserted(&self) -> u64 {
        self.next_seq
    }
}
