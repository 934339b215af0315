//! Random-pairing sampler for fully dynamic streams.
//!
//! Deletions are paired against future insertions: deleting a sampled edge
//! frees a slot and bumps the sampled-deletion counter; deleting an unsampled
//! edge bumps the unsampled-deletion counter. While uncompensated deletions
//! are outstanding, an arriving insertion fills a freed slot with probability
//! `sampled / (sampled + unsampled)` and otherwise only pays down the
//! unsampled counter. With no deletions outstanding the sampler is a plain
//! reservoir.

use super::reservoir::ReservoirState;
use super::SamplingError;
use crate::edge::{Edge, Sign, SignedEdge};

/// What an offer did to the sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairingAction {
    /// Insertion stored, evicting `evicted` when the reservoir path replaced
    /// a resident (compensation inserts always land in freed space).
    Inserted { evicted: Option<Edge> },
    /// Insertion not stored.
    Skipped,
    /// Deletion of a sampled edge: removed from the reservoir.
    Removed,
    /// Deletion of an unsampled edge: counter-compensated only.
    Compensated,
}

/// Reservoir plus random-pairing compensation counters.
#[derive(Debug, Clone)]
pub struct PairingState {
    reservoir: ReservoirState,
    /// Uncompensated deletions of edges that were not in the sample.
    deletions_unsampled: u64,
    /// Uncompensated deletions of edges that were in the sample.
    deletions_sampled: u64,
    /// Insertions minus deletions offered to this sampler.
    net_eligible: u64,
}

impl PairingState {
    pub fn new(capacity: u64, seed: u64) -> Self {
        Self {
            reservoir: ReservoirState::new(capacity, seed),
            deletions_unsampled: 0,
            deletions_sampled: 0,
            net_eligible: 0,
        }
    }

    /// Offers a signed edge. Draws at most one PRNG value (insertions with a
    /// full reservoir or outstanding deletions); deletions draw none.
    pub fn offer(&mut self, event: SignedEdge) -> Result<PairingAction, SamplingError> {
        match event.sign {
            Sign::Insert => self.offer_insert(event.edge),
            Sign::Delete => self.offer_delete(event.edge),
        }
    }

    fn offer_insert(&mut self, edge: Edge) -> Result<PairingAction, SamplingError> {
        let outstanding = self.deletions_unsampled + self.deletions_sampled;
        if outstanding == 0 {
            let outcome = self.reservoir.offer(edge)?;
            self.net_eligible += 1;
            return Ok(if outcome.sampled() {
                PairingAction::Inserted { evicted: outcome.evicted() }
            } else {
                PairingAction::Skipped
            });
        }
        self.net_eligible += 1;
        if self.reservoir.rng_mut().below(outstanding) < self.deletions_sampled {
            self.reservoir.force_insert(edge)?;
            self.deletions_sampled -= 1;
            Ok(PairingAction::Inserted { evicted: None })
        } else {
            self.deletions_unsampled -= 1;
            Ok(PairingAction::Skipped)
        }
    }

    fn offer_delete(&mut self, edge: Edge) -> Result<PairingAction, SamplingError> {
        if self.net_eligible == 0 {
            return Err(SamplingError::DeletionUnderflow(edge));
        }
        self.net_eligible -= 1;
        if self.reservoir.remove(&edge) {
            self.deletions_sampled += 1;
            Ok(PairingAction::Removed)
        } else {
            self.deletions_unsampled += 1;
            Ok(PairingAction::Compensated)
        }
    }

    /// Probability that two stored wedge edges were both sampled:
    /// 1 while `t + unsampled + sampled < k`, otherwise
    /// `k/d * (k-1)/(d-1)` with `d = t + unsampled + sampled`.
    ///
    /// Meaningful for capacity >= 2 (enforced where configurations are
    /// built); the same value serves insertions and deletions.
    pub fn wedge_probability(&self) -> f64 {
        let k = self.reservoir.capacity();
        let d = self.net_eligible + self.deletions_unsampled + self.deletions_sampled;
        if d < k {
            1.0
        } else {
            (k as f64 / d as f64) * ((k - 1) as f64 / (d - 1) as f64)
        }
    }

    pub fn reservoir(&self) -> &ReservoirState {
        &self.reservoir
    }

    pub fn capacity(&self) -> u64 {
        self.reservoir.capacity()
    }

    pub fn len(&self) -> u64 {
        self.reservoir.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reservoir.is_empty()
    }

    pub fn contains(&self, edge: &Edge) -> bool {
        self.reservoir.contains(edge)
    }

    pub fn deletions_unsampled(&self) -> u64 {
        self.deletions_unsampled
    }

    pub fn deletions_sampled(&self) -> u64 {
        self.deletions_sampled
    }

    pub fn net_eligible(&self) -> u64 {
        self.net_eligible
    }

    /// Clears all state, keeping capacity and allocations, re-seeding the
    /// PRNG.
    pub fn reset(&mut self, seed: u64) {
        self.reservoir.reset(seed);
        self.deletions_unsampled = 0;
        self.deletions_sampled = 0;
        self.net_eligible = 0;
    }

    #[cfg(any(test, feature = "testkit"))]
    pub(crate) fn with_state_for_test(
        capacity: u64,
        seed: u64,
        stored: &[Edge],
        net_eligible: u64,
        deletions_unsampled: u64,
        deletions_sampled: u64,
    ) -> Self {
        let mut reservoir = ReservoirState::new(capacity, seed);
        for &e in stored {
            reservoir.force_insert(e).expect("distinct test edges");
        }
        Self { reservoir, deletions_unsampled, deletions_sampled, net_eligible }
    }
}
