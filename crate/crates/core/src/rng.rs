//! Seeded, splittable randomness.
//!
//! A trial owns one root [`RngStream`]. Every consumer (initialisation,
//! selection, corruption, sampling, niching, ...) derives its own named
//! sub-stream, so adding a new consumer never shifts the numbers seen by the
//! existing ones.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent stream from this stream's seed and `name`.
    ///
    /// The result depends only on `(seed, name)`, never on how many numbers
    /// were already drawn from `self`.
    pub fn substream(&self, name: &str) -> RngStream {
        RngStream::new(splitmix64(self.seed ^ fnv1a(name.as_bytes())))
    }

    /// Like [`substream`](Self::substream) but keyed by an integer, e.g. a
    /// trial or cell index.
    pub fn substream_indexed(&self, name: &str, index: u64) -> RngStream {
        let key = fnv1a(name.as_bytes()) ^ splitmix64(index.wrapping_add(0x9e37_79b9));
        RngStream::new(splitmix64(self.seed ^ key))
    }
}

impl RngCore for RngStream {
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

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
