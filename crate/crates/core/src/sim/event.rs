//! Deterministic event queue.
//!
//! Events leave in `(time, phase, seq)` order. `phase` lets transmission
//! completions run before other events stamped with the same instant; `seq`
//! is the insertion counter and breaks all remaining ties.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Ordering class for events that share a timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    TransmissionComplete = 0,
    Other = 1,
}

#[derive(Debug)]
struct Entry<E> {
    time: f64,
    phase: Phase,
    seq: u64,
    event: E,
}

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
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.phase.cmp(&self.phase))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Debug)]
pub struct EventQueue<E> {
    heap: BinaryHeap<Entry<E>>,
    next_seq: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            next_seq: 0,
        }
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, time: f64, phase: Phase, event: E) -> u64 {
        debug_assert!(time.is_finite());
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry {
            time,
            phase,
            seq,
            event,
        });
        seq
    }

    pub fn pop(&mut self) -> Option<(f64, E)> {
        self.heap.pop().map(|e| (e.time, e.event))
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ties_resolve_by_phase_then_insertion() {
        let mut q = EventQueue::new();
        q.push(1.0, Phase::Other, "a");
        q.push(1.0, Phase::TransmissionComplete, "tx");
        q.push(0.5, Phase::Other, "early");
        q.push(1.0, Phase::Other, "b");
        let order: Vec<_> = std::iter::from_fn(|| q.pop().map(|(_, e)| e)).collect();
        assert_eq!(order, ["early", "tx", "a", "b"]);
    }

    proptest! {
        #[test]
        fn pops_in_lexicographic_order(items in proptest::collection::vec((0u8..20, any::<bool>()), 0..200)) {
            let mut q = EventQueue::new();
            for (i, (t, tx)) in items.iter().enumerate() {
                let phase = if *tx { Phase::TransmissionComplete } else { Phase::Other };
                q.push(*t as f64 * 0.25, phase, (i, phase));
            }
            let mut last: Option<(f64, Phase, usize)> = None;
            while let Some((t, (i, phase))) = q.pop() {
                if let Some((lt, lp, li)) = last {
                    prop_assert!((lt, lp, li) < (t, phase, i));
                }
                last = Some((t, phase, i));
            }
        }
    }
}
