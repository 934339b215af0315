//! Deterministic randomness: the splitmix64 generator and its finalizer.
//!
//! The same finalizer doubles as the node-partitioning hash (see
//! [`crate::routing`]), so one documented mixing function covers every source
//! of pseudo-randomness in the system. Generator identity recorded in run
//! metadata: `splitmix64`.

/// Golden-ratio increment of the splitmix64 state walk.
pub const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer: avalanching 64-bit mixer, bit-exact on every
/// platform. `mix64(s)` is also the first output of [`SplitMix64`] seeded
/// with `s`.
#[inline]
pub fn mix64(x: u64) -> u64 {
    let mut x = x.wrapping_add(GOLDEN_GAMMA);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

/// The splitmix64 generator: outputs `mix64(seed)`, `mix64(seed + gamma)`,
/// `mix64(seed + 2*gamma)`, ...
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let out = mix64(self.state);
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        out
    }

    /// Uniform draw from `[0, n)` via the 128-bit multiply-high reduction.
    /// The residual bias is below `n / 2^64`, orders of magnitude under any
    /// tolerance asserted in this crate. `n` must be nonzero.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        (((self.next_u64() as u128) * (n as u128)) >> 64) as u64
    }

    /// Uniform draw from `[0, 1)` with 53 random bits.
    #[inline]
    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
