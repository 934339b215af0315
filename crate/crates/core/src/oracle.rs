//! Ground-truth triangle counts: a static counter over an edge set and an
//! incremental counter that tracks a dynamic stream event by event.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::edge::{NodeId, Sign, SignedEdge};
use crate::stream::{CanonicalStream, StreamError};

/// Exact global and per-node local triangle counts. Locals cover every node
/// of the graph, including nodes in no triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCounts {
    pub global: u64,
    pub locals: BTreeMap<NodeId, u64>,
}

impl ExactCounts {
    pub fn local(&self, node: NodeId) -> u64 {
        self.locals.get(&node).copied().unwrap_or(0)
    }
}

/// Exact counts of a static simple graph by degree-ordered adjacency
/// intersection: each edge is oriented toward the higher (degree, id) rank
/// and each triangle found exactly once at its lowest-ranked edge.
pub fn exact_static<I: IntoIterator<Item = crate::edge::Edge>>(edges: I) -> ExactCounts {
    let edges: Vec<crate::edge::Edge> = edges.into_iter().collect();
    let mut degree: BTreeMap<NodeId, u64> = BTreeMap::new();
    for e in &edges {
        *degree.entry(e.u()).or_insert(0) += 1;
        *degree.entry(e.v()).or_insert(0) += 1;
    }
    let rank = |n: NodeId| (degree[&n], n);

    // forward adjacency: neighbors of higher rank, sorted for merge-intersect
    let mut forward: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for e in &edges {
        let (lo, hi) = if rank(e.u()) < rank(e.v()) { (e.u(), e.v()) } else { (e.v(), e.u()) };
        forward.entry(lo).or_default().push(hi);
    }
    for list in forward.values_mut() {
        list.sort_unstable();
    }

    let mut counts = ExactCounts {
        global: 0,
        locals: degree.keys().map(|&n| (n, 0)).collect(),
    };
    let empty: Vec<NodeId> = Vec::new();
    for e in &edges {
        let (lo, hi) = if rank(e.u()) < rank(e.v()) { (e.u(), e.v()) } else { (e.v(), e.u()) };
        let fa = forward.get(&lo).unwrap_or(&empty);
        let fb = forward.get(&hi).unwrap_or(&empty);
        // merge-intersect two sorted lists
        let (mut i, mut j) = (0, 0);
        while i < fa.len() && j < fb.len() {
            match fa[i].cmp(&fb[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    let c = fa[i];
                    counts.global += 1;
                    for n in [lo, hi, c] {
                        *counts.locals.get_mut(&n).expect("endpoint has a degree") += 1;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    counts
}

/// Incremental exact counter over a dynamic stream.
///
/// Each insertion of `{u,v}` adds the common-neighbor count of `u` and `v`
/// to the global figure and updates the three corners; deletions subtract
/// symmetrically. The common neighborhood is the same before and after
/// toggling the edge itself, so the update order is immaterial.
#[derive(Debug, Clone, Default)]
pub struct IncrementalOracle {
    adjacency: BTreeMap<NodeId, BTreeSet<NodeId>>,
    global: i64,
    locals: BTreeMap<NodeId, i64>,
    position: u64,
}

impl IncrementalOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn apply(&mut self, event: SignedEdge) -> Result<(), StreamError> {
        let (u, v) = (event.edge.u(), event.edge.v());
        let direction = match event.sign {
            Sign::Insert => 1i64,
            Sign::Delete => -1i64,
        };

        let closed = self.common_neighbors(u, v);
        self.global += direction * closed.len() as i64;
        for &c in &closed {
            *self.locals.entry(c).or_insert(0) += direction;
        }
        for n in [u, v] {
            *self.locals.entry(n).or_insert(0) += direction * closed.len() as i64;
        }

        match event.sign {
            Sign::Insert => {
                let fresh = self.adjacency.entry(u).or_default().insert(v)
                    && self.adjacency.entry(v).or_default().insert(u);
                if !fresh {
                    return Err(StreamError::InsertLive {
                        index: self.position as usize,
                        edge: event.edge,
                    });
                }
            }
            Sign::Delete => {
                let had = self
                    .adjacency
                    .get_mut(&u)
                    .map(|s| s.remove(&v))
                    .unwrap_or(false);
                if !had {
                    return Err(StreamError::DeleteAbsent {
                        index: self.position as usize,
                        edge: event.edge,
                    });
                }
                self.adjacency.get_mut(&v).map(|s| s.remove(&u));
                for n in [u, v] {
                    if self.adjacency.get(&n).is_some_and(|s| s.is_empty()) {
                        self.adjacency.remove(&n);
                        self.locals.remove(&n);
                    }
                }
            }
        }
        self.position += 1;
        Ok(())
    }

    fn common_neighbors(&self, u: NodeId, v: NodeId) -> Vec<NodeId> {
        let (Some(nu), Some(nv)) = (self.adjacency.get(&u), self.adjacency.get(&v)) else {
            return Vec::new();
        };
        let (small, large) = if nu.len() <= nv.len() { (nu, nv) } else { (nv, nu) };
        small.iter().copied().filter(|c| large.contains(c)).collect()
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    /// Counts over the nodes currently holding at least one live edge.
    pub fn snapshot(&self) -> ExactCounts {
        debug_assert!(self.global >= 0);
        ExactCounts {
            global: self.global.max(0) as u64,
            locals: self
                .adjacency
                .keys()
                .map(|&n| (n, self.locals.get(&n).copied().unwrap_or(0).max(0) as u64))
                .collect(),
        }
    }
}

/// Replays `stream`, emitting a snapshot at each of `positions` (which must
/// be sorted, unique and within the stream).
pub fn exact_at_positions(
    stream: &CanonicalStream,
    positions: &[u64],
) -> Result<Vec<ExactCounts>, StreamError> {
    let mut oracle = IncrementalOracle::new();
    let mut out = Vec::with_capacity(positions.len());
    let mut next = positions.iter().copied().peekable();
    while next.peek() == Some(&0) {
        out.push(oracle.snapshot());
        next.next();
    }
    for (i, ev) in stream.events().iter().enumerate() {
        oracle.apply(*ev)?;
        while next.peek() == Some(&(i as u64 + 1)) {
            out.push(oracle.snapshot());
            next.next();
        }
    }
    debug_assert!(next.peek().is_none(), "positions beyond stream length");
    Ok(out)
}
