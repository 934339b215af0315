//! Canonical graph streams and fully dynamic stream synthesis.
//!
//! A canonical stream is either insertion-only (each undirected edge appears
//! once, no self-loops) or fully dynamic, where every deletion targets a
//! currently live edge and no edge is inserted while live. Validity is
//! enforced at construction by a single scan over a live-edge set, so
//! everything downstream can trust the sequence.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use crate::edge::{Edge, NodeId, Sign, SignedEdge};
use crate::rng::SplitMix64;

/// A stream rejected by the validity scan.
#[derive(Debug, Clone, PartialEq)]
pub enum StreamError {
    /// Deletion of an edge that is not currently live.
    DeleteAbsent { index: usize, edge: Edge },
    /// Insertion of an edge that is already live.
    InsertLive { index: usize, edge: Edge },
    /// Deletion fraction outside `[0, 1]`.
    InvalidDeletionFraction(f64),
}

impl fmt::Display for StreamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamError::DeleteAbsent { index, edge } => {
                write!(f, "event {index}: deletion of absent edge {edge}")
            }
            StreamError::InsertLive { index, edge } => {
                write!(f, "event {index}: insertion of live edge {edge}")
            }
            StreamError::InvalidDeletionFraction(d) => {
                write!(f, "deletion fraction {d} outside [0, 1]")
            }
        }
    }
}

impl core::error::Error for StreamError {}

/// A validated, ordered sequence of stream events.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalStream {
    events: Vec<SignedEdge>,
    node_count: usize,
    insertions: usize,
    deletions: usize,
}

impl CanonicalStream {
    /// Validates and wraps an event sequence.
    pub fn new(events: Vec<SignedEdge>) -> Result<Self, StreamError> {
        let mut live: BTreeSet<Edge> = BTreeSet::new();
        let mut nodes: BTreeSet<NodeId> = BTreeSet::new();
        let mut insertions = 0usize;
        let mut deletions = 0usize;
        for (index, ev) in events.iter().enumerate() {
            match ev.sign {
                Sign::Insert => {
                    if !live.insert(ev.edge) {
                        return Err(StreamError::InsertLive { index, edge: ev.edge });
                    }
                    insertions += 1;
                }
                Sign::Delete => {
                    if !live.remove(&ev.edge) {
                        return Err(StreamError::DeleteAbsent { index, edge: ev.edge });
                    }
                    deletions += 1;
                }
            }
            nodes.insert(ev.edge.u());
            nodes.insert(ev.edge.v());
        }
        Ok(Self { events, node_count: nodes.len(), insertions, deletions })
    }

    /// Wraps a deduplicated edge list as an insertion-only stream.
    pub fn from_edges(edges: Vec<Edge>) -> Result<Self, StreamError> {
        Self::new(edges.into_iter().map(SignedEdge::insert).collect())
    }

    pub fn events(&self) -> &[SignedEdge] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Distinct nodes appearing in any event.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn insertion_count(&self) -> usize {
        self.insertions
    }

    pub fn deletion_count(&self) -> usize {
        self.deletions
    }

    pub fn is_insertion_only(&self) -> bool {
        self.deletions == 0
    }

    /// Edges still live after the final event.
    pub fn surviving_edges(&self) -> BTreeSet<Edge> {
        let mut live = BTreeSet::new();
        for ev in &self.events {
            match ev.sign {
                Sign::Insert => {
                    live.insert(ev.edge);
                }
                Sign::Delete => {
                    live.remove(&ev.edge);
                }
            }
        }
        live
    }

    /// A validated prefix of the first `n` events.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.min(self.events.len());
        // A prefix of a valid stream is valid.
        Self::new(self.events[..n].to_vec()).expect("prefix of a valid stream")
    }
}

/// Turns an insertion-only stream into a fully dynamic one by scheduling a
/// deletion for `round(delta * |E|)` uniformly chosen edges.
///
/// Each chosen edge's deletion is placed uniformly over the insertion gaps
/// strictly after its own insertion (including the end of the stream);
/// deletions landing in the same gap keep insertion order. Deterministic
/// given `seed`.
pub fn synthesize_fully_dynamic(
    stream: &CanonicalStream,
    delta: f64,
    seed: u64,
) -> Result<CanonicalStream, StreamError> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(StreamError::InvalidDeletionFraction(delta));
    }
    debug_assert!(stream.is_insertion_only());
    let m = stream.len();
    let want = ((delta * m as f64) + 0.5) as usize; // round, delta*m >= 0
    let want = want.min(m);

    let mut rng = SplitMix64::new(seed);

    // Uniform sample of `want` distinct insertion indices: partial
    // Fisher-Yates over the index vector.
    let mut indices: Vec<usize> = (0..m).collect();
    for i in 0..want {
        let j = i + rng.below((m - i) as u64) as usize;
        indices.swap(i, j);
    }
    let mut chosen = indices[..want].to_vec();
    chosen.sort_unstable();

    // deletions_at[g] = deletions emitted just before insertion g (g == m
    // means after the last insertion), in insertion order.
    let mut deletions_at: Vec<Vec<Edge>> = Vec::new();
    deletions_at.resize(m + 1, Vec::new());
    for &idx in &chosen {
        let gap = idx + 1 + rng.below((m - idx) as u64) as usize;
        deletions_at[gap].push(stream.events()[idx].edge);
    }

    let mut events = Vec::with_capacity(m + want);
    for (g, ev) in stream.events().iter().enumerate() {
        for &edge in &deletions_at[g] {
            events.push(SignedEdge::delete(edge));
        }
        events.push(*ev);
    }
    for &edge in &deletions_at[m] {
        events.push(SignedEdge::delete(edge));
    }
    CanonicalStream::new(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(a: NodeId, b: NodeId) -> Edge {
        Edge::new(a, b).unwrap()
    }

    fn path_stream() -> CanonicalStream {
        CanonicalStream::from_edges(vec![edge(1, 2), edge(2, 3), edge(3, 4)]).unwrap()
    }

    #[test]
    fn validity_rejects_delete_of_absent_edge() {
        let err = CanonicalStream::new(vec![SignedEdge::delete(edge(1, 2))]).unwrap_err();
        assert_eq!(err, StreamError::DeleteAbsent { index: 0, edge: edge(1, 2) });
    }

    #[test]
    fn validity_rejects_reinsert_while_live() {
        let err = CanonicalStream::new(vec![
            SignedEdge::insert(edge(1, 2)),
            SignedEdge::insert(edge(1, 2)),
        ])
        .unwrap_err();
        assert_eq!(err, StreamError::InsertLive { index: 1, edge: edge(1, 2) });
    }

    #[test]
    fn reinsert_after_delete_is_valid() {
        let s = CanonicalStream::new(vec![
            SignedEdge::insert(edge(1, 2)),
            SignedEdge::delete(edge(1, 2)),
            SignedEdge::insert(edge(1, 2)),
        ])
        .unwrap();
        assert_eq!(s.insertion_count(), 2);
        assert_eq!(s.deletion_count(), 1);
        assert_eq!(s.surviving_edges().len(), 1);
    }

    #[test]
    fn synthesize_delta_zero_is_identity() {
        let s = path_stream();
        let dynamic = synthesize_fully_dynamic(&s, 0.0, 7).unwrap();
        assert_eq!(dynamic, s);
    }

    #[test]
    fn synthesize_delta_one_empties_graph() {
        let s = path_stream();
        let dynamic = synthesize_fully_dynamic(&s, 1.0, 7).unwrap();
        assert_eq!(dynamic.len(), 6);
        assert_eq!(dynamic.deletion_count(), 3);
        assert!(dynamic.surviving_edges().is_empty());
    }

    #[test]
    fn synthesize_event_count_and_ordering() {
        let edges: Vec<Edge> = (0..100).map(|i| edge(i, i + 1000)).collect();
        let s = CanonicalStream::from_edges(edges).unwrap();
        let dynamic = synthesize_fully_dynamic(&s, 0.2, 42).unwrap();
        assert_eq!(dynamic.len(), 120);
        assert_eq!(dynamic.deletion_count(), 20);
        // every deletion strictly after its insertion
        for (i, ev) in dynamic.events().iter().enumerate() {
            if ev.sign == Sign::Delete {
                let ins = dynamic.events()[..i]
                    .iter()
                    .position(|e| e.sign == Sign::Insert && e.edge == ev.edge);
                assert!(ins.is_some(), "deletion at {i} with no earlier insertion");
            }
        }
    }

    #[test]
    fn synthesize_is_deterministic() {
        let s = path_stream();
        let a = synthesize_fully_dynamic(&s, 0.5, 9).unwrap();
        let b = synthesize_fully_dynamic(&s, 0.5, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_delta_rejected() {
        let s = path_stream();
        assert!(synthesize_fully_dynamic(&s, -0.1, 0).is_err());
        assert!(synthesize_fully_dynamic(&s, 1.1, 0).is_err());
    }

    #[test]
    fn prefix_counts() {
        let s = path_stream();
        let p = s.prefix(2);
        assert_eq!(p.len(), 2);
        assert_eq!(p.node_count(), 3);
    }
}
