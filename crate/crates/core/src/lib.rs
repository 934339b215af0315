//! Single-pass triangle counting over graph streams, built from small
//! deterministic state machines: reservoir samplers, a random-pairing sampler
//! for fully dynamic streams (insertions and deletions), and an adaptive
//! sample pool that pins the effective sampling ratio above a configured
//! threshold without knowing the stream length in advance.
//!
//! The crate also carries the pieces a distributed deployment shares between
//! nodes: the bit-exact hash partitioner, the per-worker counting loops, the
//! aggregator, an exact oracle, and the accuracy metrics used to score
//! estimates against it. Everything here is `no_std`-compatible (with `alloc`);
//! IO, the cluster harness, and the CLI live in the companion `dtc` crate.
//!
//! All randomness flows through [`rng::SplitMix64`], seeded per sampler, so a
//! run is reproducible bit-for-bit from its configuration.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("dtc-core needs either the `std` or the `libm` feature");

pub mod aggregation;
pub mod edge;
mod math;
pub mod metrics;
pub mod oracle;
pub mod rng;
pub mod routing;
pub mod sampling;
pub mod stream;
pub mod workers;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use edge::{Edge, NodeId, Sign, SignedEdge};
pub use stream::CanonicalStream;
