//! Cluster-level accumulation of per-worker count deltas.
//!
//! Workers flush their counts as sequenced deltas; the aggregator adds them
//! into the running global and per-node estimates and can freeze a snapshot
//! at any flushed stream position. Merging is order-insensitive up to float
//! rounding, but the harness always merges in (worker, sequence) order so
//! replays are bit-identical.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::edge::NodeId;
use crate::routing::WorkerId;
use crate::workers::LocalCounts;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AggregationError {
    /// A delta replayed or skipped its per-worker sequence number.
    DuplicateDelta { worker: WorkerId, sequence: u64, expected: u64 },
    UnknownWorker(WorkerId),
    /// Snapshot requested beyond the current stream position.
    FuturePosition { requested: u64, current: u64 },
    /// Snapshot requested at a position that was never flushed.
    NotFlushed(u64),
}

impl fmt::Display for AggregationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggregationError::DuplicateDelta { worker, sequence, expected } => write!(
                f,
                "delta from worker {worker} with sequence {sequence}, expected {expected}"
            ),
            AggregationError::UnknownWorker(w) => write!(f, "delta from unknown worker {w}"),
            AggregationError::FuturePosition { requested, current } => {
                write!(f, "snapshot at {requested} beyond current position {current}")
            }
            AggregationError::NotFlushed(p) => write!(f, "no snapshot recorded at position {p}"),
        }
    }
}

impl core::error::Error for AggregationError {}

/// A worker's counts accumulated since its previous flush.
#[derive(Debug, Clone)]
pub struct WorkerDelta {
    pub worker: WorkerId,
    pub sequence: u64,
    pub counts: LocalCounts,
}

/// Cluster estimates frozen at a stream position.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSnapshot {
    pub position: u64,
    pub global: f64,
    pub locals: BTreeMap<NodeId, f64>,
}

impl CountSnapshot {
    pub fn local(&self, node: NodeId) -> f64 {
        self.locals.get(&node).copied().unwrap_or(0.0)
    }
}

/// Single consumer of per-worker delta streams.
#[derive(Debug, Clone)]
pub struct Aggregator {
    expected_sequence: Vec<u64>,
    global: f64,
    locals: BTreeMap<NodeId, f64>,
    position: u64,
    snapshots: Vec<CountSnapshot>,
}

impl Aggregator {
    pub fn new(worker_count: u32) -> Self {
        Self {
            expected_sequence: alloc::vec![0; worker_count as usize],
            global: 0.0,
            locals: BTreeMap::new(),
            position: 0,
            snapshots: Vec::new(),
        }
    }

    /// Adds a delta. Sequence numbers are per worker, starting at 0 and
    /// incrementing by one per flush; anything else is rejected.
    pub fn accumulate(&mut self, delta: WorkerDelta) -> Result<(), AggregationError> {
        let slot = self
            .expected_sequence
            .get_mut(delta.worker as usize)
            .ok_or(AggregationError::UnknownWorker(delta.worker))?;
        if delta.sequence != *slot {
            return Err(AggregationError::DuplicateDelta {
                worker: delta.worker,
                sequence: delta.sequence,
                expected: *slot,
            });
        }
        *slot += 1;
        self.global += delta.counts.global();
        for (node, value) in delta.counts.iter() {
            *self.locals.entry(node).or_insert(0.0) += value;
        }
        Ok(())
    }

    /// Freezes the current estimates as the snapshot for `position`.
    pub fn mark_position(&mut self, position: u64) {
        debug_assert!(position >= self.position, "positions must be non-decreasing");
        self.position = position;
        self.snapshots.push(self.current());
    }

    /// Estimates as of exactly the first `position` arrivals. Only positions
    /// the harness flushed at are available.
    pub fn snapshot_at(&self, position: u64) -> Result<&CountSnapshot, AggregationError> {
        if position > self.position {
            return Err(AggregationError::FuturePosition {
                requested: position,
                current: self.position,
            });
        }
        self.snapshots
            .iter()
            .find(|s| s.position == position)
            .ok_or(AggregationError::NotFlushed(position))
    }

    pub fn snapshots(&self) -> &[CountSnapshot] {
        &self.snapshots
    }

    /// Estimates at the current position.
    pub fn current(&self) -> CountSnapshot {
        CountSnapshot {
            position: self.position,
            global: self.global,
            locals: self.locals.clone(),
        }
    }

    pub fn position(&self) -> u64 {
        self.position
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta(worker: WorkerId, sequence: u64, global: f64, nodes: &[(NodeId, f64)]) -> WorkerDelta {
        let counts = LocalCounts::from_parts(global, nodes.iter().copied().collect());
        WorkerDelta { worker, sequence, counts }
    }

    #[test]
    fn sums_worker_globals() {
        let mut agg = Aggregator::new(3);
        agg.accumulate(delta(0, 0, 2.0, &[])).unwrap();
        agg.accumulate(delta(1, 0, 2.0, &[])).unwrap();
        agg.accumulate(delta(2, 0, 0.0, &[])).unwrap();
        assert!((agg.current().global - 4.0).abs() < 1e-12);
    }

    #[test]
    fn empty_aggregation_is_zero() {
        let mut agg = Aggregator::new(2);
        agg.mark_position(0);
        let s = agg.snapshot_at(0).unwrap();
        assert_eq!(s.global, 0.0);
        assert!(s.locals.values().all(|v| *v == 0.0));
    }

    #[test]
    fn identity_merge_single_worker() {
        let mut agg = Aggregator::new(1);
        agg.accumulate(delta(0, 0, 7.5, &[(3, 7.5), (4, 7.5), (5, 7.5)])).unwrap();
        let s = agg.current();
        assert!((s.global - 7.5).abs() < 1e-9);
        assert!((s.local(3) - 7.5).abs() < 1e-9);
    }

    #[test]
    fn duplicate_sequence_rejected() {
        let mut agg = Aggregator::new(2);
        agg.accumulate(delta(0, 0, 1.0, &[])).unwrap();
        let err = agg.accumulate(delta(0, 0, 1.0, &[])).unwrap_err();
        assert_eq!(err, AggregationError::DuplicateDelta { worker: 0, sequence: 0, expected: 1 });
        let err = agg.accumulate(delta(0, 2, 1.0, &[])).unwrap_err();
        assert_eq!(err, AggregationError::DuplicateDelta { worker: 0, sequence: 2, expected: 1 });
        let err = agg.accumulate(delta(5, 0, 1.0, &[])).unwrap_err();
        assert_eq!(err, AggregationError::UnknownWorker(5));
    }

    #[test]
    fn future_position_rejected() {
        let mut agg = Aggregator::new(1);
        agg.mark_position(3);
        assert!(matches!(
            agg.snapshot_at(9),
            Err(AggregationError::FuturePosition { requested: 9, current: 3 })
        ));
        assert!(matches!(agg.snapshot_at(1), Err(AggregationError::NotFlushed(1))));
    }
}
