//! Test support: exhaustive stream enumeration, an independent
//! probability-tree oracle for the random-pairing sampler, seeded graph
//! generators, and constructors for pre-shaped sampler states.
//!
//! Enabled by the `testkit` feature; nothing here is part of the production
//! surface. The oracle deliberately re-derives sampler semantics from the
//! definition rather than calling into [`crate::sampling`], so the two sides
//! stay independent.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::edge::{Edge, NodeId, Sign, SignedEdge};
use crate::rng::SplitMix64;
use crate::sampling::{AdaptivePool, PairingState};

/// The six undirected pairs over nodes `{0, 1, 2, 3}`, in lexicographic
/// order. Slot indices into this table label edges in canonical patterns.
pub fn four_node_pairs() -> Vec<Edge> {
    let mut pairs = Vec::new();
    for a in 0..4u64 {
        for b in (a + 1)..4 {
            pairs.push(Edge::new(a, b).unwrap());
        }
    }
    pairs
}

/// Visits every valid stream over the given edge slots with `1..=max_len`
/// events (insert any absent edge or delete any live one at each step).
/// Streams are passed as slices of events; the visitor must not retain them.
pub fn for_each_stream(pairs: &[Edge], max_len: usize, mut f: impl FnMut(&[SignedEdge])) {
    let mut live = alloc::vec![false; pairs.len()];
    let mut events: Vec<SignedEdge> = Vec::with_capacity(max_len);
    fn recurse(
        pairs: &[Edge],
        live: &mut [bool],
        events: &mut Vec<SignedEdge>,
        max_len: usize,
        f: &mut impl FnMut(&[SignedEdge]),
    ) {
        if !events.is_empty() {
            f(events);
        }
        if events.len() == max_len {
            return;
        }
        for i in 0..pairs.len() {
            let ev = if live[i] {
                SignedEdge::delete(pairs[i])
            } else {
                SignedEdge::insert(pairs[i])
            };
            live[i] = !live[i];
            events.push(ev);
            recurse(pairs, live, events, max_len, f);
            events.pop();
            live[i] = !live[i];
        }
    }
    recurse(pairs, &mut live, &mut events, max_len, &mut f);
}

/// Visits one representative stream per edge-relabeling class: new edges are
/// introduced in slot order, and at each step the choices are "introduce the
/// next unused slot", "re-insert a dead slot", or "delete a live slot".
///
/// Samplers treat edges as opaque set elements, so every stream over the
/// same slot count is a relabeling of exactly one canonical stream and has
/// identical membership statistics under the relabeling.
pub fn for_each_canonical_stream(
    pairs: &[Edge],
    max_len: usize,
    mut f: impl FnMut(&[SignedEdge]),
) {
    let mut events: Vec<SignedEdge> = Vec::with_capacity(max_len);
    let mut live: Vec<usize> = Vec::new();
    let mut dead: Vec<usize> = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        pairs: &[Edge],
        used: usize,
        live: &mut Vec<usize>,
        dead: &mut Vec<usize>,
        events: &mut Vec<SignedEdge>,
        max_len: usize,
        f: &mut impl FnMut(&[SignedEdge]),
    ) {
        if !events.is_empty() {
            f(events);
        }
        if events.len() == max_len {
            return;
        }
        if used < pairs.len() {
            live.push(used);
            events.push(SignedEdge::insert(pairs[used]));
            recurse(pairs, used + 1, live, dead, events, max_len, f);
            events.pop();
            live.pop();
        }
        for di in 0..dead.len() {
            let slot = dead.remove(di);
            live.push(slot);
            events.push(SignedEdge::insert(pairs[slot]));
            recurse(pairs, used, live, dead, events, max_len, f);
            events.pop();
            live.pop();
            dead.insert(di, slot);
        }
        for li in 0..live.len() {
            let slot = live.remove(li);
            dead.push(slot);
            events.push(SignedEdge::delete(pairs[slot]));
            recurse(pairs, used, live, dead, events, max_len, f);
            events.pop();
            dead.pop();
            live.insert(li, slot);
        }
    }
    recurse(pairs, 0, &mut live, &mut dead, &mut events, max_len, &mut f);
}

/// Exact final-membership probability of every edge after replaying `events`
/// through a random-pairing sampler of the given capacity, by brute-force
/// enumeration of the full probability tree (every reservoir replacement
/// choice and every compensation coin).
///
/// Edges never live at the end carry probability 0 and are omitted.
pub fn pairing_membership_probabilities(
    events: &[SignedEdge],
    capacity: u64,
) -> BTreeMap<Edge, f64> {
    let mut out = BTreeMap::new();
    let mut sample: Vec<Edge> = Vec::new();
    walk(events, capacity as usize, &mut sample, 0, 0, 0, 1.0, &mut out);
    return out;

    #[allow(clippy::too_many_arguments)]
    fn walk(
        events: &[SignedEdge],
        k: usize,
        sample: &mut Vec<Edge>,
        net: u64,
        unsampled: u64,
        sampled: u64,
        prob: f64,
        out: &mut BTreeMap<Edge, f64>,
    ) {
        let Some((ev, rest)) = events.split_first() else {
            for &e in sample.iter() {
                *out.entry(e).or_insert(0.0) += prob;
            }
            return;
        };
        match ev.sign {
            Sign::Insert => {
                let outstanding = unsampled + sampled;
                if outstanding == 0 {
                    if sample.len() < k {
                        sample.push(ev.edge);
                        walk(rest, k, sample, net + 1, 0, 0, prob, out);
                        sample.pop();
                    } else if k == 0 {
                        walk(rest, k, sample, net + 1, 0, 0, prob, out);
                    } else {
                        // reservoir replacement over the virtual population
                        let p_store = k as f64 / (net + 1) as f64;
                        debug_assert!(p_store <= 1.0);
                        for j in 0..k {
                            let old = sample[j];
                            sample[j] = ev.edge;
                            walk(rest, k, sample, net + 1, 0, 0, prob * p_store / k as f64, out);
                            sample[j] = old;
                        }
                        if p_store < 1.0 {
                            walk(rest, k, sample, net + 1, 0, 0, prob * (1.0 - p_store), out);
                        }
                    }
                } else {
                    if sampled > 0 {
                        debug_assert!(sample.len() < k, "freed slot must exist");
                        sample.push(ev.edge);
                        walk(
                            rest,
                            k,
                            sample,
                            net + 1,
                            unsampled,
                            sampled - 1,
                            prob * sampled as f64 / outstanding as f64,
                            out,
                        );
                        sample.pop();
                    }
                    if unsampled > 0 {
                        walk(
                            rest,
                            k,
                            sample,
                            net + 1,
                            unsampled - 1,
                            sampled,
                            prob * unsampled as f64 / outstanding as f64,
                            out,
                        );
                    }
                }
            }
            Sign::Delete => {
                debug_assert!(net > 0, "valid streams never underflow");
                if let Some(pos) = sample.iter().position(|&e| e == ev.edge) {
                    let removed = sample.remove(pos);
                    walk(rest, k, sample, net - 1, unsampled, sampled + 1, prob, out);
                    sample.insert(pos, removed);
                } else {
                    walk(rest, k, sample, net - 1, unsampled + 1, sampled, prob, out);
                }
            }
        }
    }
}

/// `min(1, k / (t + d))` with `t` the final net count and `d` the final
/// outstanding deletions of a stream: the closed-form membership
/// probability every live edge must attain. Both quantities evolve
/// deterministically, so this is a single number per stream.
pub fn pairing_closed_form(events: &[SignedEdge], capacity: u64) -> f64 {
    let mut net = 0u64;
    let mut outstanding = 0u64;
    for ev in events {
        match ev.sign {
            Sign::Insert => {
                net += 1;
                outstanding = outstanding.saturating_sub(1);
            }
            Sign::Delete => {
                net -= 1;
                outstanding += 1;
            }
        }
    }
    let virtual_population = net + outstanding;
    if virtual_population == 0 {
        1.0
    } else {
        (capacity as f64 / virtual_population as f64).min(1.0)
    }
}

/// Uniform random simple graph with `n` nodes and exactly `m` edges, by
/// seeded rejection sampling. Edge order is discovery order.
pub fn gnm_edges(n: u64, m: u64, seed: u64) -> Vec<Edge> {
    assert!(n >= 2);
    assert!(m <= n * (n - 1) / 2, "more edges than the complete graph holds");
    let mut rng = SplitMix64::new(seed);
    let mut seen: BTreeSet<Edge> = BTreeSet::new();
    let mut edges = Vec::with_capacity(m as usize);
    while edges.len() < m as usize {
        let a = rng.below(n);
        let b = rng.below(n);
        if let Some(e) = Edge::new(a, b) {
            if seen.insert(e) {
                edges.push(e);
            }
        }
    }
    edges
}

/// All nodes referenced by an edge list.
pub fn nodes_of(edges: &[Edge]) -> BTreeSet<NodeId> {
    edges.iter().flat_map(|e| [e.u(), e.v()]).collect()
}

/// A pairing sampler already holding `stored` with the given counters, for
/// fixture tests that need a precise state.
pub fn pairing_state(
    capacity: u64,
    seed: u64,
    stored: &[Edge],
    net_eligible: u64,
    deletions_unsampled: u64,
    deletions_sampled: u64,
) -> PairingState {
    PairingState::with_state_for_test(
        capacity,
        seed,
        stored,
        net_eligible,
        deletions_unsampled,
        deletions_sampled,
    )
}

/// An adaptive pool with hand-built finalized segments.
pub fn pool_with_segments(
    capacity: u64,
    ratio_threshold: f64,
    total_budget: u64,
    seed: u64,
    segments: &[(&[Edge], u64)],
) -> AdaptivePool {
    let mut pool = AdaptivePool::new(capacity, ratio_threshold, total_budget, seed)
        .expect("valid test pool config");
    for &(edges, eligible_seen) in segments {
        pool.push_segment_for_test(edges.to_vec(), eligible_seen);
    }
    pool
}
