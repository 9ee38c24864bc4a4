//! Seedable random streams.
//!
//! Every stream is a ChaCha8 generator keyed by a 64-bit seed and positioned
//! on one of its 2^64 independent streams, so deriving a sub-stream for a
//! chain, a learning rate or a replication is O(1) and never consumes draws
//! from the parent.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Explicit random stream owned by exactly one sequential consumer.
#[derive(Debug, Clone)]
pub struct RngHandle {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngHandle {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Fresh handle on a stream keyed by this handle's stream and `key`.
    /// Depends only on `(seed, stream_id, key)`, never on how many draws
    /// this handle has produced.
    pub fn derive(&self, key: u64) -> RngHandle {
        RngHandle::new(self.seed, derive_stream(self.stream_id, key))
    }

    /// Uniform draw on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

impl RngCore for RngHandle {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream id for child `key` of stream `parent`.
pub fn derive_stream(parent: u64, key: u64) -> u64 {
    splitmix64(parent ^ splitmix64(key.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Stream key for a learning rate, so per-eta streams do not depend on
/// the position of eta in a grid.
pub fn eta_key(eta: f64) -> u64 {
    eta.to_bits()
}
