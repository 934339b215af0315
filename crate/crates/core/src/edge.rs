//! Edges and stream events.

use core::fmt;

/// Node identifier. Kept as the raw id from the input file; nothing in the
/// pipeline relabels nodes.
pub type NodeId = u64;

/// An undirected edge in canonical orientation (`u < v`). Self-loops are
/// unrepresentable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    u: NodeId,
    v: NodeId,
}

impl Edge {
    /// Canonicalizes the endpoint order; `None` for a self-loop.
    #[inline]
    pub fn new(a: NodeId, b: NodeId) -> Option<Self> {
        if a == b {
            None
        } else if a < b {
            Some(Self { u: a, v: b })
        } else {
            Some(Self { u: b, v: a })
        }
    }

    #[inline]
    pub fn u(&self) -> NodeId {
        self.u
    }

    #[inline]
    pub fn v(&self) -> NodeId {
        self.v
    }

    /// The endpoint that is not `n`, if `n` is an endpoint.
    #[inline]
    pub fn other(&self, n: NodeId) -> Option<NodeId> {
        if n == self.u {
            Some(self.v)
        } else if n == self.v {
            Some(self.u)
        } else {
            None
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.u, self.v)
    }
}

/// Whether a stream event inserts or deletes its edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Insert,
    Delete,
}

impl Sign {
    /// `+1.0` for insertions, `-1.0` for deletions: the factor applied to
    /// count updates.
    #[inline]
    pub fn factor(&self) -> f64 {
        match self {
            Sign::Insert => 1.0,
            Sign::Delete => -1.0,
        }
    }

    pub fn symbol(&self) -> char {
        match self {
            Sign::Insert => '+',
            Sign::Delete => '-',
        }
    }
}

/// A stream event: an edge plus its insert/delete sign. The arrival index is
/// the event's position in its [`crate::CanonicalStream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignedEdge {
    pub edge: Edge,
    pub sign: Sign,
}

impl SignedEdge {
    pub fn insert(edge: Edge) -> Self {
        Self { edge, sign: Sign::Insert }
    }

    pub fn delete(edge: Edge) -> Self {
        Self { edge, sign: Sign::Delete }
    }
}

impl fmt::Display for SignedEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.sign.symbol(), self.edge.u(), self.edge.v())
    }
}
