//! Deterministic random number streams.
//!
//! Every source of randomness in the simulation is a named stream derived from
//! `(root_seed + replicate_index, stream name)`. Streams are independent ChaCha
//! generators, so adding draws to one phase never shifts the numbers another
//! phase sees, and replicates can run in parallel without sharing state.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator handed out for one named stream.
pub type StreamRng = ChaCha8Rng;

/// Derives per-phase generators for a single replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngFactory {
    replicate_seed: u64,
}

impl RngFactory {
    /// Replicate `k` of a run seeds its factory with `root_seed + k`.
    pub fn new(root_seed: u64, replicate: u32) -> Self {
        Self {
            replicate_seed: root_seed.wrapping_add(u64::from(replicate)),
        }
    }

    pub fn replicate_seed(&self) -> u64 {
        self.replicate_seed
    }

    /// Opens the stream for `name`. Calling twice with the same name yields
    /// generators that produce identical sequences.
    pub fn stream(&self, name: &str) -> StreamRng {
        let mut seed = [0u8; 32];
        let mut x = self.replicate_seed ^ fnv1a(name.as_bytes());
        for chunk in seed.chunks_exact_mut(8) {
            x = splitmix64(x);
            chunk.copy_from_slice(&x.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }

    /// Stream scoped to a simulation day, for phases that draw per day.
    pub fn day_stream(&self, name: &str, day: u32) -> StreamRng {
        // Folding the day into the name keeps day N's draws independent of how
        // many draws day N-1 consumed.
        self.stream(&format!("{name}.{day}"))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
