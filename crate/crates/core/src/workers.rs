//! Per-worker streaming counters.
//!
//! Both worker kinds follow count-before-sample: an arriving edge first
//! closes wedges against the stored sample and updates the estimates, and
//! only then, if one of its endpoints hashes to this worker, is offered to
//! the sampler. The counts update for an edge therefore never reflects that
//! edge's own sampling fate.

use alloc::collections::BTreeMap;
use core::fmt;

use crate::edge::{Edge, NodeId, Sign, SignedEdge};
use crate::routing::{Partitioner, WorkerId};
use crate::sampling::{AdaptivePool, EdgeLocation, PairingAction, PairingState, SamplingError};

/// Global and per-node triangle estimates. Every counted triangle adds its
/// weight once to the global figure and once to each of its three corners,
/// so `global == sum(locals) / 3` holds at all times (up to rounding).
///
/// Locals are stored sparsely; an absent node reads as zero. Estimates may go
/// negative transiently under deletions; they are never clamped, since
/// clamping would bias the estimator.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocalCounts {
    global: f64,
    per_node: BTreeMap<NodeId, f64>,
}

impl LocalCounts {
    pub fn from_parts(global: f64, per_node: BTreeMap<NodeId, f64>) -> Self {
        Self { global, per_node }
    }

    pub fn record_triangle(&mut self, u: NodeId, v: NodeId, c: NodeId, weight: f64) {
        self.global += weight;
        for n in [u, v, c] {
            *self.per_node.entry(n).or_insert(0.0) += weight;
        }
    }

    pub fn global(&self) -> f64 {
        self.global
    }

    pub fn local(&self, node: NodeId) -> f64 {
        self.per_node.get(&node).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.per_node.iter().map(|(&n, &v)| (n, v))
    }

    pub fn is_empty(&self) -> bool {
        self.global == 0.0 && self.per_node.is_empty()
    }
}

/// Errors raised while processing a delivered edge.
#[derive(Debug, Clone, PartialEq)]
pub enum WorkerError {
    /// The adaptive-ratio worker consumes insertion-only streams.
    DeletionUnsupported(Edge),
    Sampling(SamplingError),
}

impl fmt::Display for WorkerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WorkerError::DeletionUnsupported(e) => {
                write!(f, "deletion of {e} in an insertion-only counter")
            }
            WorkerError::Sampling(e) => write!(f, "sampling error: {e}"),
        }
    }
}

impl core::error::Error for WorkerError {}

impl From<SamplingError> for WorkerError {
    fn from(e: SamplingError) -> Self {
        WorkerError::Sampling(e)
    }
}

/// Adjacency view over a worker's stored sample, with a per-edge payload
/// (the pool location for the adaptive worker, `()` for the dynamic one).
///
/// Rows are ordered maps, so neighbor enumeration (and with it the order of
/// floating-point accumulation) is canonical regardless of sampler history.
#[derive(Debug, Clone, Default)]
pub struct SampleIndex<P> {
    adjacency: BTreeMap<NodeId, BTreeMap<NodeId, P>>,
    edges: u64,
}

impl<P: Copy> SampleIndex<P> {
    pub fn new() -> Self {
        Self { adjacency: BTreeMap::new(), edges: 0 }
    }

    pub fn insert(&mut self, edge: Edge, payload: P) {
        self.adjacency.entry(edge.u()).or_default().insert(edge.v(), payload);
        self.adjacency.entry(edge.v()).or_default().insert(edge.u(), payload);
        self.edges += 1;
    }

    pub fn remove(&mut self, edge: Edge) {
        for (a, b) in [(edge.u(), edge.v()), (edge.v(), edge.u())] {
            if let Some(row) = self.adjacency.get_mut(&a) {
                row.remove(&b);
                if row.is_empty() {
                    self.adjacency.remove(&a);
                }
            }
        }
        self.edges -= 1;
    }

    pub fn relabel(&mut self, edge: Edge, payload: P) {
        for (a, b) in [(edge.u(), edge.v()), (edge.v(), edge.u())] {
            if let Some(slot) = self.adjacency.get_mut(&a).and_then(|row| row.get_mut(&b)) {
                *slot = payload;
            }
        }
    }

    pub fn len(&self) -> u64 {
        self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges == 0
    }

    /// Visits every common neighbor `c` of `u` and `v` in ascending node
    /// order, with the payloads of `{u,c}` and `{v,c}`.
    pub fn for_each_common_neighbor(&self, u: NodeId, v: NodeId, mut f: impl FnMut(NodeId, P, P)) {
        let (Some(row_u), Some(row_v)) = (self.adjacency.get(&u), self.adjacency.get(&v)) else {
            return;
        };
        let (small, large, swapped) =
            if row_u.len() <= row_v.len() { (row_u, row_v, false) } else { (row_v, row_u, true) };
        for (&c, &p_small) in small {
            if let Some(&p_large) = large.get(&c) {
                if swapped {
                    f(c, p_large, p_small);
                } else {
                    f(c, p_small, p_large);
                }
            }
        }
    }

    /// Common neighbors of `u` and `v` with wedge payloads, collected.
    pub fn common_neighbors(&self, u: NodeId, v: NodeId) -> alloc::vec::Vec<(NodeId, P, P)> {
        let mut out = alloc::vec::Vec::new();
        self.for_each_common_neighbor(u, v, |c, a, b| out.push((c, a, b)));
        out
    }
}

/// Counters every worker reports to the harness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkerStats {
    /// Edges delivered to this worker (unicast or broadcast).
    pub received: u64,
    /// Edges offered to the sampler (an endpoint hashed here).
    pub offered: u64,
    /// Peak stored edges across reservoir and pool segments.
    pub stored_peak: u64,
}

impl WorkerStats {
    fn note_stored(&mut self, stored: u64) {
        if stored > self.stored_peak {
            self.stored_peak = stored;
        }
    }
}

/// Insertion-only worker: adaptive sample pool, wedge probabilities by
/// location pair.
#[derive(Debug, Clone)]
pub struct ArWorker {
    id: WorkerId,
    partitioner: Partitioner,
    pool: AdaptivePool,
    index: SampleIndex<EdgeLocation>,
    counts: LocalCounts,
    pending: LocalCounts,
    stats: WorkerStats,
}

impl ArWorker {
    pub fn new(id: WorkerId, partitioner: Partitioner, pool: AdaptivePool) -> Self {
        Self {
            id,
            partitioner,
            pool,
            index: SampleIndex::new(),
            counts: LocalCounts::default(),
            pending: LocalCounts::default(),
            stats: WorkerStats::default(),
        }
    }

    pub fn process(&mut self, event: SignedEdge) -> Result<(), WorkerError> {
        if event.sign == Sign::Delete {
            return Err(WorkerError::DeletionUnsupported(event.edge));
        }
        self.stats.received += 1;
        let (u, v) = (event.edge.u(), event.edge.v());

        let Self { pool, index, counts, pending, .. } = self;
        index.for_each_common_neighbor(u, v, |c, loc_uc, loc_vc| {
            let weight = 1.0 / pool.wedge_probability(loc_uc, loc_vc);
            counts.record_triangle(u, v, c, weight);
            pending.record_triangle(u, v, c, weight);
        });

        if self.partitioner.eligible(self.id, event.edge) {
            self.stats.offered += 1;
            let offer = self.pool.offer(event.edge)?;
            if let Some(evicted) = offer.evicted {
                self.index.remove(evicted);
            }
            if offer.stored {
                self.index.insert(event.edge, EdgeLocation::Current);
            }
            if let Some(segment) = offer.rotated {
                for &e in self.pool.segment(segment).edges() {
                    self.index.relabel(e, EdgeLocation::Segment(segment));
                }
            }
            self.stats.note_stored(self.pool.stored_edges());
        }
        Ok(())
    }

    /// Counts accumulated since the last flush, leaving the buffer empty.
    pub fn take_pending(&mut self) -> LocalCounts {
        core::mem::take(&mut self.pending)
    }

    pub fn counts(&self) -> &LocalCounts {
        &self.counts
    }

    pub fn pool(&self) -> &AdaptivePool {
        &self.pool
    }

    pub fn stats(&self) -> WorkerStats {
        self.stats
    }

    pub fn id(&self) -> WorkerId {
        self.id
    }
}

/// Fully dynamic worker: random-pairing sampler, one wedge probability per
/// arrival shared by every triangle the edge closes.
#[derive(Debug, Clone)]
pub struct FdWorker {
    id: WorkerId,
    partitioner: Partitioner,
    pairing: PairingState,
    index: SampleIndex<()>,
    counts: LocalCounts,
    pending: LocalCounts,
    stats: WorkerStats,
}

impl FdWorker {
    pub fn new(id: WorkerId, partitioner: Partitioner, pairing: PairingState) -> Self {
        Self {
            id,
            partitioner,
            pairing,
            index: SampleIndex::new(),
            counts: LocalCounts::default(),
            pending: LocalCounts::default(),
            stats: WorkerStats::default(),
        }
    }

    pub fn process(&mut self, event: SignedEdge) -> Result<(), WorkerError> {
        self.stats.received += 1;
        let (u, v) = (event.edge.u(), event.edge.v());

        // Evaluated once per arrival, on the state before sampling.
        let weight = event.sign.factor() / self.pairing.wedge_probability();
        let Self { index, counts, pending, .. } = self;
        index.for_each_common_neighbor(u, v, |c, (), ()| {
            counts.record_triangle(u, v, c, weight);
            pending.record_triangle(u, v, c, weight);
        });

        if self.partitioner.eligible(self.id, event.edge) {
            self.stats.offered += 1;
            match self.pairing.offer(event)? {
                PairingAction::Inserted { evicted } => {
                    if let Some(e) = evicted {
                        self.index.remove(e);
                    }
                    self.index.insert(event.edge, ());
                }
                PairingAction::Removed => self.index.remove(event.edge),
                PairingAction::Skipped | PairingAction::Compensated => {}
            }
            self.stats.note_stored(self.pairing.len());
        }
        Ok(())
    }

    pub fn take_pending(&mut self) -> LocalCounts {
        core::mem::take(&mut self.pending)
    }

    pub fn counts(&self) -> &LocalCounts {
        &self.counts
    }

    pub fn pairing(&self) -> &PairingState {
        &self.pairing
    }

    pub fn stats(&self) -> WorkerStats {
        self.stats
    }

    pub fn id(&self) -> WorkerId {
        self.id
    }

    #[cfg(test)]
    pub(crate) fn with_pairing_and_index(
        id: WorkerId,
        partitioner: Partitioner,
        pairing: PairingState,
        stored: &[Edge],
    ) -> Self {
        let mut w = Self::new(id, partitioner, pairing);
        for &e in stored {
            w.index.insert(e, ());
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn edge(a: u64, b: u64) -> Edge {
        Edge::new(a, b).unwrap()
    }

    fn k4_edges() -> Vec<Edge> {
        vec![edge(1, 2), edge(1, 3), edge(1, 4), edge(2, 3), edge(2, 4), edge(3, 4)]
    }

    fn ar_worker(capacity: u64, ratio: f64, budget: u64) -> ArWorker {
        let pool = AdaptivePool::new(capacity, ratio, budget, 1).unwrap();
        ArWorker::new(0, Partitioner::new(1, 0), pool)
    }

    #[test]
    fn common_neighbors_k4_minus_edge() {
        let mut index: SampleIndex<()> = SampleIndex::new();
        for e in k4_edges() {
            if e != edge(1, 2) {
                index.insert(e, ());
            }
        }
        let cs: Vec<u64> = index.common_neighbors(1, 2).iter().map(|&(c, _, _)| c).collect();
        assert_eq!(cs, vec![3, 4]);
    }

    #[test]
    fn common_neighbors_empty_and_path() {
        let empty: SampleIndex<()> = SampleIndex::new();
        assert!(empty.common_neighbors(1, 2).is_empty());

        let mut path: SampleIndex<()> = SampleIndex::new();
        path.insert(edge(1, 2), ());
        path.insert(edge(2, 3), ());
        let cs: Vec<u64> = path.common_neighbors(1, 3).iter().map(|&(c, _, _)| c).collect();
        assert_eq!(cs, vec![2]);
    }

    #[test]
    fn ar_exact_on_k4() {
        let mut w = ar_worker(16, 0.2, 16);
        for e in k4_edges() {
            w.process(SignedEdge::insert(e)).unwrap();
        }
        assert!((w.counts().global() - 4.0).abs() < 1e-9);
        for n in 1..=4 {
            assert!((w.counts().local(n) - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ar_counts_on_third_edge_only() {
        let mut w = ar_worker(8, 0.2, 8);
        w.process(SignedEdge::insert(edge(1, 2))).unwrap();
        assert_eq!(w.counts().global(), 0.0);
        w.process(SignedEdge::insert(edge(1, 3))).unwrap();
        assert_eq!(w.counts().global(), 0.0);
        w.process(SignedEdge::insert(edge(2, 3))).unwrap();
        assert!((w.counts().global() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ar_rejects_deletions() {
        let mut w = ar_worker(8, 0.2, 8);
        let err = w.process(SignedEdge::delete(edge(1, 2))).unwrap_err();
        assert_eq!(err, WorkerError::DeletionUnsupported(edge(1, 2)));
    }

    #[test]
    fn ar_cross_segment_weight_is_reciprocal_product() {
        // two segments with exact ratio 0.2 each; wedges in different
        // segments make the closing increment 1/(0.2*0.2) = 25
        let mut pool = AdaptivePool::new(2, 0.2, 1000, 1).unwrap();
        pool.push_segment_for_test(vec![edge(1, 3)], 5);
        pool.push_segment_for_test(vec![edge(2, 3)], 5);
        let mut w = ArWorker::new(0, Partitioner::new(1, 0), pool);
        w.index.insert(edge(1, 3), EdgeLocation::Segment(0));
        w.index.insert(edge(2, 3), EdgeLocation::Segment(1));

        w.process(SignedEdge::insert(edge(1, 2))).unwrap();
        assert!((w.counts().global() - 25.0).abs() < 1e-9);
        assert!((w.counts().local(3) - 25.0).abs() < 1e-9);
    }

    #[test]
    fn fd_insert_then_delete_cancels() {
        let pairing = PairingState::new(64, 9);
        let mut w = FdWorker::new(0, Partitioner::new(1, 0), pairing);
        for e in [edge(1, 2), edge(1, 3), edge(2, 3)] {
            w.process(SignedEdge::insert(e)).unwrap();
        }
        assert!((w.counts().global() - 1.0).abs() < 1e-12);
        w.process(SignedEdge::delete(edge(1, 3))).unwrap();
        assert!(w.counts().global().abs() < 1e-12);
        for n in 1..=3 {
            assert!(w.counts().local(n).abs() < 1e-12);
        }
    }

    #[test]
    fn fd_exact_on_k4() {
        let pairing = PairingState::new(64, 9);
        let mut w = FdWorker::new(0, Partitioner::new(1, 0), pairing);
        for e in k4_edges() {
            w.process(SignedEdge::insert(e)).unwrap();
        }
        assert!((w.counts().global() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn fd_weight_is_reciprocal_of_pair_probability() {
        // k=10, t+unsampled+sampled = 20, wedges {1,3},{2,3} stored
        let pairing = PairingState::with_state_for_test(
            10,
            77,
            &[edge(1, 3), edge(2, 3)],
            16,
            2,
            2,
        );
        let mut w = FdWorker::with_pairing_and_index(
            0,
            Partitioner::new(1, 0),
            pairing,
            &[edge(1, 3), edge(2, 3)],
        );
        w.process(SignedEdge::insert(edge(1, 2))).unwrap();
        let expect = 1.0 / (0.5 * (9.0 / 19.0));
        assert!((w.counts().global() - expect).abs() < 1e-9);
        assert!((w.counts().global() - 4.222222222222222).abs() < 1e-6);
    }

    #[test]
    fn global_is_one_third_of_local_sum() {
        let pairing = PairingState::new(8, 13);
        let mut w = FdWorker::new(0, Partitioner::new(1, 0), pairing);
        let mut rng = crate::rng::SplitMix64::new(31);
        let mut live: Vec<Edge> = Vec::new();
        for step in 0..400u64 {
            let ev = if !live.is_empty() && rng.below(4) == 0 {
                let i = rng.below(live.len() as u64) as usize;
                SignedEdge::delete(live.swap_remove(i))
            } else {
                // dense-ish node range so triangles actually form
                let a = rng.below(12);
                let b = rng.below(12);
                match Edge::new(a, b) {
                    Some(e) if !live.contains(&e) => {
                        live.push(e);
                        SignedEdge::insert(e)
                    }
                    _ => continue,
                }
            };
            w.process(ev).unwrap();
            let sum: f64 = (0..12).map(|n| w.counts().local(n)).sum();
            let diff = (w.counts().global() - sum / 3.0).abs();
            assert!(diff < 1e-9, "step {step}: global {} vs sum/3 {}", w.counts().global(), sum / 3.0);
        }
    }

    #[test]
    fn non_eligible_worker_stores_and_counts_nothing() {
        let p = Partitioner::new(4, 0);
        // pick a worker id and a node quad whose hashes all avoid it, then
        // drive that worker directly
        let nodes: Vec<u64> = (0..64).collect();
        let mut avoided = None;
        'outer: for w in 0..4u32 {
            for quad in nodes.windows(4) {
                if quad.iter().all(|&n| p.worker_for(n) != w) {
                    avoided = Some((w, [quad[0], quad[1], quad[2], quad[3]]));
                    break 'outer;
                }
            }
        }
        let (wid, q) = avoided.expect("some worker avoids some quad");
        let pairing = PairingState::new(64, 9);
        let mut w = FdWorker::new(wid, p, pairing);
        for e in [edge(q[0], q[1]), edge(q[0], q[2]), edge(q[1], q[2])] {
            w.process(SignedEdge::insert(e)).unwrap();
        }
        // never stored anything, so it closed no wedges
        assert_eq!(w.stats().offered, 0);
        assert_eq!(w.counts().global(), 0.0);
    }
}
