//! Hash-based edge scheduling between workers.
//!
//! The master unicasts an edge when both endpoints hash to the same worker
//! and broadcasts it otherwise. Routing ignores the insert/delete sign. The
//! node hash is the splitmix64 finalizer over `node XOR seed`, reduced mod
//! the worker count, so placements are bit-exact across platforms.

use crate::edge::{Edge, NodeId};
use crate::rng::mix64;

/// Worker index in `[0, worker_count)`.
pub type WorkerId = u32;

/// Pure node-to-worker mapping shared by the master and the workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partitioner {
    worker_count: u32,
    seed: u64,
}

/// Where the master sends an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutingDecision {
    Unicast(WorkerId),
    Broadcast,
}

impl Partitioner {
    /// `worker_count` must be at least 1.
    pub fn new(worker_count: u32, seed: u64) -> Self {
        assert!(worker_count >= 1, "need at least one worker");
        Self { worker_count, seed }
    }

    pub fn worker_count(&self) -> u32 {
        self.worker_count
    }

    #[inline]
    pub fn worker_for(&self, node: NodeId) -> WorkerId {
        (mix64(node ^ self.seed) % self.worker_count as u64) as WorkerId
    }

    /// Unicast when both endpoints collide, broadcast otherwise.
    #[inline]
    pub fn route(&self, edge: Edge) -> RoutingDecision {
        let wu = self.worker_for(edge.u());
        let wv = self.worker_for(edge.v());
        if wu == wv {
            RoutingDecision::Unicast(wu)
        } else {
            RoutingDecision::Broadcast
        }
    }

    /// Whether `worker` may store `edge` (an endpoint hashes to it).
    #[inline]
    pub fn eligible(&self, worker: WorkerId, edge: Edge) -> bool {
        self.worker_for(edge.u()) == worker || self.worker_for(edge.v()) == worker
    }

    /// Whether `worker` receives `edge` under the unicast/broadcast rule.
    #[inline]
    pub fn delivers_to(&self, worker: WorkerId, edge: Edge) -> bool {
        match self.route(edge) {
            RoutingDecision::Unicast(w) => w == worker,
            RoutingDecision::Broadcast => true,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edge::Edge;
    use crate::rng::SplitMix64;

    #[test]
    fn single_worker_maps_everything_to_zero() {
        let p = Partitioner::new(1, 0xABCD);
        for node in [0u64, 1, 17, u64::MAX] {
            assert_eq!(p.worker_for(node), 0);
        }
        assert_eq!(p.route(Edge::new(3, 9).unwrap()), RoutingDecision::Unicast(0));
    }

    // Frozen golden value: mix64(0) = 0xE220A8397B1DCDAF, mod 10 = 5.
    #[test]
    fn hash_golden_value() {
        let p = Partitioner::new(10, 0);
        assert_eq!(p.worker_for(0), 5);
    }

    #[test]
    fn routing_matches_hash_collision() {
        let p = Partitioner::new(7, 42);
        let mut saw_unicast = false;
        let mut saw_broadcast = false;
        for a in 0..40u64 {
            for b in (a + 1)..40u64 {
                let e = Edge::new(a, b).unwrap();
                match p.route(e) {
                    RoutingDecision::Unicast(w) => {
                        saw_unicast = true;
                        assert_eq!(w, p.worker_for(a));
                        assert_eq!(w, p.worker_for(b));
                    }
                    RoutingDecision::Broadcast => {
                        saw_broadcast = true;
                        assert_ne!(p.worker_for(a), p.worker_for(b));
                    }
                }
            }
        }
        assert!(saw_unicast && saw_broadcast);
    }

    #[test]
    fn bucket_loads_are_near_uniform() {
        let p = Partitioner::new(10, 0);
        let mut rng = SplitMix64::new(555);
        let n = 1_000_000u32;
        let mut counts = [0u32; 10];
        for _ in 0..n {
            counts[p.worker_for(rng.next_u64()) as usize] += 1;
        }
        let expect = n as f64 / 10.0;
        for c in counts {
            assert!(
                (c as f64 - expect).abs() / expect < 0.01,
                "bucket load {c} vs expected {expect}"
            );
        }
    }

    // For every hash coloring of a triangle's vertices and every arrival
    // order, at most one worker can hold both wedge edges when the closing
    // edge reaches it.
    #[test]
    fn triangle_counted_by_at_most_one_worker() {
        for w in 1u32..=4 {
            for hu in 0..w {
                for hv in 0..w {
                    for hc in 0..w {
                        let h = [hu, hv, hc];
                        // closing edge (i, j); wedge edges share vertex k
                        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
                            let receives = |x: u32| if h[i] == h[j] { x == h[i] } else { true };
                            let can_close = (0..w)
                                .filter(|&x| receives(x))
                                .filter(|&x| {
                                    let holds_ik = x == h[i] || x == h[k];
                                    let holds_jk = x == h[j] || x == h[k];
                                    holds_ik && holds_jk
                                })
                                .count();
                            assert!(
                                can_close <= 1,
                                "W={w} colors={h:?} closing=({i},{j}): {can_close} closers"
                            );
                        }
                    }
                }
            }
        }
    }
}
