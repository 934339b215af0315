//! Adaptive sample pool: rotates full reservoirs into immutable segments so
//! the effective sampling ratio stays at or above a configured threshold.

use alloc::vec::Vec;

use super::reservoir::{OfferOutcome, ReservoirState};
use super::SamplingError;
use crate::edge::Edge;

/// Where a stored edge lives inside an [`AdaptivePool`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeLocation {
    /// In the live reservoir.
    Current,
    /// In the finalized segment with this index.
    Segment(u32),
}

/// A finalized reservoir: exactly `capacity` edges sampled uniformly from the
/// `eligible_seen` offers of its generation. Immutable once created.
#[derive(Debug, Clone)]
pub struct PoolSegment {
    edges: Vec<Edge>,
    eligible_seen: u64,
}

impl PoolSegment {
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Offers seen by the generation this segment froze.
    pub fn eligible_seen(&self) -> u64 {
        self.eligible_seen
    }

    /// Exact per-edge sampling ratio of this segment.
    pub fn ratio(&self) -> f64 {
        self.edges.len() as f64 / self.eligible_seen as f64
    }
}

/// Result of offering an edge to the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolOffer {
    /// The offered edge was stored in the live reservoir.
    pub stored: bool,
    /// Edge evicted from the live reservoir, if any.
    pub evicted: Option<Edge>,
    /// Index of the segment created if this offer triggered a rotation.
    pub rotated: Option<u32>,
}

/// Reservoir plus finalized segments plus the remaining edge-slot budget.
///
/// Rotation fires on the first offer where the live reservoir's ratio
/// `capacity / eligible_seen` reaches the threshold, provided the remaining
/// budget can fund a fresh reservoir. The budget passed to [`new`] is the
/// worker's total; the live reservoir's slots are charged up front, so total
/// stored edges never exceed it.
///
/// [`new`]: AdaptivePool::new
#[derive(Debug, Clone)]
pub struct AdaptivePool {
    current: ReservoirState,
    segments: Vec<PoolSegment>,
    ratio_threshold: f64,
    rotation_trigger: u64,
    remaining_budget: u64,
    exhaustion_events: u64,
}

impl AdaptivePool {
    /// `capacity` is the per-reservoir size k (>= 2 so the pairwise
    /// probabilities are positive), `ratio_threshold` in (0, 1], and
    /// `total_budget` the worker's full edge-slot allowance (>= capacity).
    pub fn new(
        capacity: u64,
        ratio_threshold: f64,
        total_budget: u64,
        seed: u64,
    ) -> Result<Self, SamplingError> {
        if capacity < 2 {
            return Err(SamplingError::InvalidCapacity(capacity));
        }
        if !(ratio_threshold > 0.0 && ratio_threshold <= 1.0) {
            return Err(SamplingError::InvalidRatioThreshold(ratio_threshold));
        }
        if total_budget < capacity {
            return Err(SamplingError::InsufficientBudget { budget: total_budget, capacity });
        }
        Ok(Self {
            current: ReservoirState::new(capacity, seed),
            segments: Vec::new(),
            ratio_threshold,
            rotation_trigger: rotation_trigger(capacity, ratio_threshold),
            remaining_budget: total_budget - capacity,
            exhaustion_events: 0,
        })
    }

    /// Offers an edge to the live reservoir, then checks the rotation
    /// trigger.
    pub fn offer(&mut self, edge: Edge) -> Result<PoolOffer, SamplingError> {
        let outcome = self.current.offer(edge)?;
        let rotated = self.rotate_if_ready();
        Ok(PoolOffer {
            stored: outcome.sampled(),
            evicted: match outcome {
                OfferOutcome::Stored { evicted } => evicted,
                OfferOutcome::Passed => None,
            },
            rotated,
        })
    }

    /// Finalizes the live reservoir into a segment once its sampling ratio
    /// has decayed to the threshold and the budget can fund a replacement.
    /// Returns the new segment's index when a rotation happened.
    ///
    /// If the trigger fires with the budget exhausted, the reservoir keeps
    /// sampling with decaying ratio and the event is recorded once.
    pub fn rotate_if_ready(&mut self) -> Option<u32> {
        if self.current.eligible_seen() < self.rotation_trigger {
            return None;
        }
        if self.remaining_budget < self.capacity() {
            if self.current.eligible_seen() == self.rotation_trigger {
                self.exhaustion_events += 1;
            }
            return None;
        }
        let (edges, eligible_seen) = self.current.drain_for_rotation();
        debug_assert_eq!(edges.len() as u64, self.capacity());
        self.remaining_budget -= self.capacity();
        self.segments.push(PoolSegment { edges, eligible_seen });
        Some((self.segments.len() - 1) as u32)
    }

    /// Probability that two stored wedge edges at the given locations were
    /// both sampled, by location case:
    ///
    /// * both live: `min(1, k/t * (k-1)/(t-1))` over the live offer count;
    /// * both in one segment: the same product over that segment's frozen
    ///   offer count;
    /// * distinct segments: product of the two exact segment ratios;
    /// * live plus segment: `min(1, k/t)` times the segment ratio.
    ///
    /// Segments use their realized ratios rather than the nominal threshold,
    /// which removes the rounding bias when `k / threshold` is not integral.
    pub fn wedge_probability(&self, a: EdgeLocation, b: EdgeLocation) -> f64 {
        let k = self.capacity();
        match (a, b) {
            (EdgeLocation::Current, EdgeLocation::Current) => {
                pair_within(k, self.current.eligible_seen())
            }
            (EdgeLocation::Segment(i), EdgeLocation::Segment(j)) if i == j => {
                pair_within(k, self.segments[i as usize].eligible_seen)
            }
            (EdgeLocation::Segment(i), EdgeLocation::Segment(j)) => {
                self.segments[i as usize].ratio() * self.segments[j as usize].ratio()
            }
            (EdgeLocation::Current, EdgeLocation::Segment(i))
            | (EdgeLocation::Segment(i), EdgeLocation::Current) => {
                let t = self.current.eligible_seen();
                let live = if t <= k { 1.0 } else { k as f64 / t as f64 };
                live * self.segments[i as usize].ratio()
            }
        }
    }

    pub fn current(&self) -> &ReservoirState {
        &self.current
    }

    pub fn segments(&self) -> &[PoolSegment] {
        &self.segments
    }

    pub fn segment(&self, index: u32) -> &PoolSegment {
        &self.segments[index as usize]
    }

    pub fn capacity(&self) -> u64 {
        self.current.capacity()
    }

    pub fn ratio_threshold(&self) -> f64 {
        self.ratio_threshold
    }

    /// Offer count at which the live reservoir's ratio reaches the threshold.
    pub fn rotation_trigger(&self) -> u64 {
        self.rotation_trigger
    }

    /// Unallocated edge slots left for future rotations.
    pub fn remaining_budget(&self) -> u64 {
        self.remaining_budget
    }

    /// Times the rotation trigger fired without budget for a fresh reservoir.
    pub fn exhaustion_events(&self) -> u64 {
        self.exhaustion_events
    }

    /// Edges currently stored across the live reservoir and all segments.
    pub fn stored_edges(&self) -> u64 {
        self.current.len() + self.segments.iter().map(|s| s.edges.len() as u64).sum::<u64>()
    }

    #[cfg(any(test, feature = "testkit"))]
    pub(crate) fn push_segment_for_test(&mut self, edges: Vec<Edge>, eligible_seen: u64) {
        self.segments.push(PoolSegment { edges, eligible_seen });
    }
}

/// Probability that two specific edges of one reservoir generation were both
/// retained: `k/t * (k-1)/(t-1)`, or 1 while the generation still fits.
fn pair_within(k: u64, t: u64) -> f64 {
    if t <= k {
        1.0
    } else {
        (k as f64 / t as f64) * ((k - 1) as f64 / (t - 1) as f64)
    }
}

/// Smallest offer count t with `t * ratio >= k`, i.e. the first time the live
/// sampling ratio `k/t` is at or below the threshold. Integer trigger, no
/// float equality.
fn rotation_trigger(k: u64, ratio: f64) -> u64 {
    let mut t = (k as f64 / ratio) as u64;
    if t == 0 {
        t = 1;
    }
    while (t as f64) * ratio < k as f64 {
        t += 1;
    }
    while t > 1 && ((t - 1) as f64) * ratio >= k as f64 {
        t -= 1;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn edge(a: u64, b: u64) -> Edge {
        Edge::new(a, b).unwrap()
    }

    fn distinct_edges(n: u64) -> Vec<Edge> {
        (0..n).map(|i| edge(2 * i, 2 * i + 1)).collect()
    }

    #[test]
    fn trigger_is_exact_for_common_ratios() {
        assert_eq!(rotation_trigger(100, 0.2), 500);
        assert_eq!(rotation_trigger(100, 1.0), 100);
        assert_eq!(rotation_trigger(100, 0.032), 3125);
        assert_eq!(rotation_trigger(3, 0.4), 8); // ceil(3/0.4) = 8, ratio 0.375
        assert_eq!(rotation_trigger(1, 1.0), 1);
    }

    #[test]
    fn rotation_at_trigger_with_budget() {
        let mut pool = AdaptivePool::new(100, 0.2, 1100, 7).unwrap();
        assert_eq!(pool.remaining_budget(), 1000);
        let mut rotated_at = None;
        for (i, e) in distinct_edges(520).into_iter().enumerate() {
            let o = pool.offer(e).unwrap();
            if let Some(seg) = o.rotated {
                rotated_at = Some((i as u64 + 1, seg));
                break;
            }
        }
        assert_eq!(rotated_at, Some((500, 0)));
        let seg = pool.segment(0);
        assert_eq!(seg.edges().len(), 100);
        assert_eq!(seg.eligible_seen(), 500);
        assert!((seg.ratio() - 0.2).abs() < 1e-12);
        assert_eq!(pool.remaining_budget(), 900);
        assert_eq!(pool.current().eligible_seen(), 0);
    }

    #[test]
    fn no_rotation_below_trigger() {
        let mut pool = AdaptivePool::new(100, 0.2, 1100, 7).unwrap();
        for e in distinct_edges(499) {
            assert_eq!(pool.offer(e).unwrap().rotated, None);
        }
        assert_eq!(pool.segments().len(), 0);
    }

    #[test]
    fn exhausted_budget_logs_once_and_keeps_sampling() {
        // total budget = 100 (live reservoir) + 50 spare < one reservoir
        let mut pool = AdaptivePool::new(100, 0.2, 150, 7).unwrap();
        assert_eq!(pool.remaining_budget(), 50);
        for e in distinct_edges(600) {
            pool.offer(e).unwrap();
        }
        assert_eq!(pool.segments().len(), 0);
        assert_eq!(pool.exhaustion_events(), 1);
        assert_eq!(pool.current().eligible_seen(), 600);
        assert_eq!(pool.current().len(), 100);
    }

    #[test]
    fn budget_decreases_exactly_k_per_rotation() {
        let mut pool = AdaptivePool::new(10, 0.5, 45, 3).unwrap();
        for e in distinct_edges(100) {
            pool.offer(e).unwrap();
        }
        // remaining started at 35: three rotations fit (each 20 offers)
        assert_eq!(pool.segments().len(), 3);
        assert_eq!(pool.remaining_budget(), 5);
        assert_eq!(pool.exhaustion_events(), 1);
        assert!(pool.stored_edges() <= 45);
        for s in pool.segments() {
            assert_eq!(s.edges().len(), 10);
            assert_eq!(s.eligible_seen(), 20);
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(matches!(
            AdaptivePool::new(1, 0.2, 10, 0),
            Err(SamplingError::InvalidCapacity(1))
        ));
        assert!(matches!(
            AdaptivePool::new(4, 0.0, 10, 0),
            Err(SamplingError::InvalidRatioThreshold(_))
        ));
        assert!(matches!(
            AdaptivePool::new(4, 1.5, 10, 0),
            Err(SamplingError::InvalidRatioThreshold(_))
        ));
        assert!(matches!(
            AdaptivePool::new(8, 0.2, 7, 0),
            Err(SamplingError::InsufficientBudget { .. })
        ));
    }

    #[test]
    fn wedge_probability_cases() {
        let mut pool = AdaptivePool::new(100, 0.2, 100_000, 7).unwrap();
        // two rotations: segments 0 and 1, each ratio exactly 0.2
        for e in distinct_edges(1000) {
            pool.offer(e).unwrap();
        }
        assert_eq!(pool.segments().len(), 2);

        // type-3: distinct segments
        let p3 = pool.wedge_probability(EdgeLocation::Segment(0), EdgeLocation::Segment(1));
        assert!((p3 - 0.04).abs() < 1e-12);

        // type-2: same segment, k=100, t_seg=500
        let p2 = pool.wedge_probability(EdgeLocation::Segment(1), EdgeLocation::Segment(1));
        assert!((p2 - 0.2 * (99.0 / 499.0)).abs() < 1e-12);
        assert!((p2 - 0.03967935871743487).abs() < 1e-6);

        // type-1 at the current offer count t = 1000 - 2*500 = 0 -> 1
        let p1 = pool.wedge_probability(EdgeLocation::Current, EdgeLocation::Current);
        assert_eq!(p1, 1.0);

        // type-4 with an under-full current reservoir -> segment ratio alone
        let p4 = pool.wedge_probability(EdgeLocation::Current, EdgeLocation::Segment(0));
        assert!((p4 - 0.2).abs() < 1e-12);
    }

    #[test]
    fn wedge_probability_type1_after_overflow() {
        let mut pool = AdaptivePool::new(100, 0.2, 100, 7).unwrap();
        for e in distinct_edges(200) {
            pool.offer(e).unwrap();
        }
        let p = pool.wedge_probability(EdgeLocation::Current, EdgeLocation::Current);
        assert!((p - 0.5 * (99.0 / 199.0)).abs() < 1e-12);
        assert!((p - 0.24874371859296482).abs() < 1e-6);

        // under-full current: probability 1
        let fresh = AdaptivePool::new(100, 0.2, 100, 7).unwrap();
        assert_eq!(fresh.wedge_probability(EdgeLocation::Current, EdgeLocation::Current), 1.0);
    }

    #[test]
    fn probabilities_stay_in_unit_interval() {
        let mut pool = AdaptivePool::new(5, 0.3, 60, 21).unwrap();
        for (i, e) in distinct_edges(400).into_iter().enumerate() {
            pool.offer(e).unwrap();
            let mut locs = vec![EdgeLocation::Current];
            for s in 0..pool.segments().len() as u32 {
                locs.push(EdgeLocation::Segment(s));
            }
            for &a in &locs {
                for &b in &locs {
                    let p = pool.wedge_probability(a, b);
                    assert!(p > 0.0 && p <= 1.0, "offer {i}: p={p} for {a:?},{b:?}");
                }
            }
        }
    }
}
