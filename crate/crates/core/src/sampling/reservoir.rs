//! Fixed-capacity uniform reservoir over an insertion-only offer sequence.

use alloc::vec::Vec;
use core::hash::BuildHasherDefault;

use hashbrown::HashMap;
use rustc_hash::FxHasher;

use super::SamplingError;
use crate::edge::Edge;
use crate::rng::SplitMix64;

type PositionMap = HashMap<Edge, u32, BuildHasherDefault<FxHasher>>;

/// Result of offering an edge to a reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OfferOutcome {
    /// The edge was stored, evicting `evicted` if the reservoir was full.
    Stored { evicted: Option<Edge> },
    /// The edge was passed over (reservoir full, replacement coin lost).
    Passed,
}

impl OfferOutcome {
    pub fn sampled(&self) -> bool {
        matches!(self, OfferOutcome::Stored { .. })
    }

    pub fn evicted(&self) -> Option<Edge> {
        match self {
            OfferOutcome::Stored { evicted } => *evicted,
            OfferOutcome::Passed => None,
        }
    }
}

/// Classic reservoir sampling: after `m >= k` offers every offered edge is
/// resident with probability exactly `k/m`.
///
/// The stored set is mirrored in a hash index so membership checks and
/// removals are O(1); nothing ever iterates the index, so its layout cannot
/// leak into results.
#[derive(Debug, Clone)]
pub struct ReservoirState {
    capacity: u64,
    eligible_seen: u64,
    slots: Vec<Edge>,
    positions: PositionMap,
    rng: SplitMix64,
}

impl ReservoirState {
    pub fn new(capacity: u64, seed: u64) -> Self {
        assert!(capacity <= u32::MAX as u64, "capacity beyond index range");
        Self {
            capacity,
            eligible_seen: 0,
            slots: Vec::with_capacity(capacity.min(1 << 20) as usize),
            positions: PositionMap::default(),
            rng: SplitMix64::new(seed),
        }
    }

    /// Offers an edge. While filling, the edge is always stored; once full,
    /// it replaces a uniformly random resident with probability
    /// `capacity / eligible_seen`. Exactly one PRNG draw once full, none
    /// before, so replaying an offer sequence is deterministic.
    pub fn offer(&mut self, edge: Edge) -> Result<OfferOutcome, SamplingError> {
        if self.positions.contains_key(&edge) {
            return Err(SamplingError::DuplicateOffer(edge));
        }
        self.eligible_seen += 1;
        if (self.slots.len() as u64) < self.capacity {
            self.push(edge);
            return Ok(OfferOutcome::Stored { evicted: None });
        }
        if self.capacity == 0 {
            return Ok(OfferOutcome::Passed);
        }
        let j = self.rng.below(self.eligible_seen);
        if j < self.capacity {
            let j = j as usize;
            let evicted = self.slots[j];
            self.positions.remove(&evicted);
            self.slots[j] = edge;
            self.positions.insert(edge, j as u32);
            Ok(OfferOutcome::Stored { evicted: Some(evicted) })
        } else {
            Ok(OfferOutcome::Passed)
        }
    }

    /// Removes an edge by value (random-pairing deletions). Does not touch
    /// the offer counter.
    pub(crate) fn remove(&mut self, edge: &Edge) -> bool {
        let Some(pos) = self.positions.remove(edge) else {
            return false;
        };
        let pos = pos as usize;
        let last = self.slots.len() - 1;
        self.slots.swap_remove(pos);
        if pos != last {
            self.positions.insert(self.slots[pos], pos as u32);
        }
        true
    }

    /// Stores an edge into guaranteed free space (random-pairing
    /// compensation). Does not touch the offer counter.
    pub(crate) fn force_insert(&mut self, edge: Edge) -> Result<(), SamplingError> {
        if self.positions.contains_key(&edge) {
            return Err(SamplingError::DuplicateOffer(edge));
        }
        debug_assert!((self.slots.len() as u64) < self.capacity, "no free slot");
        self.push(edge);
        Ok(())
    }

    fn push(&mut self, edge: Edge) {
        self.positions.insert(edge, self.slots.len() as u32);
        self.slots.push(edge);
    }

    /// Finalizes the current contents for a pool rotation: returns the stored
    /// edges and the offer count, resetting both while keeping the PRNG
    /// stream running.
    pub(crate) fn drain_for_rotation(&mut self) -> (Vec<Edge>, u64) {
        let edges = core::mem::take(&mut self.slots);
        let seen = self.eligible_seen;
        self.positions.clear();
        self.eligible_seen = 0;
        (edges, seen)
    }

    /// Clears contents and counters, keeping capacity and re-seeding the
    /// PRNG. Lets hot loops reuse allocations.
    pub fn reset(&mut self, seed: u64) {
        self.slots.clear();
        self.positions.clear();
        self.eligible_seen = 0;
        self.rng = SplitMix64::new(seed);
    }

    pub(crate) fn rng_mut(&mut self) -> &mut SplitMix64 {
        &mut self.rng
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    /// Edges offered to this reservoir since the last reset/rotation.
    pub fn eligible_seen(&self) -> u64 {
        self.eligible_seen
    }

    pub fn len(&self) -> u64 {
        self.slots.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn contains(&self, edge: &Edge) -> bool {
        self.positions.contains_key(edge)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.slots
    }
}
