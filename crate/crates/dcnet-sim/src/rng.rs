//! Deterministic random streams.
//!
//! Every source of randomness is a ChaCha8 stream keyed by
//! (master seed, node id, purpose). Adding a new consumer of randomness to
//! one part of the simulator therefore never perturbs the draws seen by
//! another part, and two runs with the same master seed replay identically
//! on any platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type NodeId = u32;

/// What a stream is used for. Each purpose gets an independent substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    WakeJitter,
    Contention,
    Waypoint,
    PeerPick,
    Capture,
    Loss,
    AppPhase,
    Topology,
    BeaconJitter,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::WakeJitter => 1,
            StreamPurpose::Contention => 2,
            StreamPurpose::Waypoint => 3,
            StreamPurpose::PeerPick => 4,
            StreamPurpose::Capture => 5,
            StreamPurpose::Loss => 6,
            StreamPurpose::AppPhase => 7,
            StreamPurpose::Topology => 8,
            StreamPurpose::BeaconJitter => 9,
        }
    }
}

/// A per-(node, purpose) deterministic generator.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, node: NodeId, purpose: StreamPurpose) -> Self {
        // SplitMix64-style mixing spreads the key material over the full
        // 32-byte ChaCha seed.
        let mut seed = [0u8; 32];
        let mut x = master_seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add((node as u64) << 8)
            .wrapping_add(purpose.tag());
        for chunk in seed.chunks_mut(8) {
            x ^= x >> 30;
            x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
            x ^= x >> 27;
            x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
            x ^= x >> 31;
            chunk.copy_from_slice(&x.to_le_bytes());
            x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        }
        RngStream {
            rng: ChaCha8Rng::from_seed(seed),
        }
    }

    /// Uniform draw in `[lo, hi)`; degenerate interval returns `lo`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        assert!(lo <= hi, "uniform draw with lo > hi ({lo} > {hi})");
        if lo == hi {
            return lo;
        }
        lo + (hi - lo) * self.rng.gen::<f64>()
    }

    /// Bernoulli draw with success probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            return false;
        }
        if p >= 1.0 {
            return true;
        }
        self.rng.gen::<f64>() < p
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        assert!(!items.is_empty());
        let i = self.rng.gen_range(0..items.len());
        &items[i]
    }
}
