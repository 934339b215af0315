//! Sampler state machines and the wedge-retention probability formulas.
//!
//! Three layers build on each other:
//!
//! * [`ReservoirState`]: fixed-capacity uniform reservoir over an
//!   insertion-only offer sequence.
//! * [`AdaptivePool`]: a reservoir plus a pool of finalized segments; full
//!   reservoirs rotate into the pool whenever their sampling ratio decays to
//!   the configured threshold, so the effective per-edge ratio never falls
//!   below it while budget remains.
//! * [`PairingState`]: a reservoir extended with random-pairing compensation
//!   counters so edge deletions are paired against future insertions.
//!
//! Each sampler owns its PRNG stream; state transitions draw a fixed number
//! of values (at most one per offer), which is what makes whole runs
//! reproducible bit-for-bit.

mod pairing;
mod pool;
mod reservoir;

pub use pairing::{PairingAction, PairingState};
pub use pool::{AdaptivePool, EdgeLocation, PoolOffer, PoolSegment};
pub use reservoir::{OfferOutcome, ReservoirState};

use core::fmt;

use crate::edge::Edge;

/// Errors surfaced by the samplers.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplingError {
    /// The offered edge is already resident. Streams are deduplicated
    /// upstream, so this indicates an ingestion bug rather than a condition
    /// to tolerate.
    DuplicateOffer(Edge),
    /// A deletion arrived while the sampler's net eligible count was zero.
    DeletionUnderflow(Edge),
    /// Pool capacity must allow the pairwise formulas (k >= 2).
    InvalidCapacity(u64),
    /// Ratio threshold outside (0, 1].
    InvalidRatioThreshold(f64),
    /// Total budget smaller than one reservoir.
    InsufficientBudget { budget: u64, capacity: u64 },
}

impl fmt::Display for SamplingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplingError::DuplicateOffer(e) => write!(f, "duplicate offer of edge {e}"),
            SamplingError::DeletionUnderflow(e) => {
                write!(f, "deletion of {e} with no eligible edges outstanding")
            }
            SamplingError::InvalidCapacity(k) => write!(f, "capacity {k} too small (need k >= 2)"),
            SamplingError::InvalidRatioThreshold(r) => {
                write!(f, "ratio threshold {r} outside (0, 1]")
            }
            SamplingError::InsufficientBudget { budget, capacity } => {
                write!(f, "total budget {budget} cannot hold one reservoir of {capacity}")
            }
        }
    }
}

impl core::error::Error for SamplingError {}
