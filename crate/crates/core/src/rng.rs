//! Counter-based keyed random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream whose key is the
//! experiment seed and whose stream id is a hash of a short tuple of counters
//! (purpose tag, step, slot, ...). A draw is therefore a pure function of
//! `(seed, tuple)`, so any individual noise sample can be replayed without
//! generating the ones before it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Purpose tags keep streams for different consumers disjoint.
pub mod tag {
    pub const NOISE: u64 = 0x6e6f_6973;
    pub const ONLINE: u64 = 0x6f6e_6c6e;
    pub const SHUFFLE: u64 = 0x7368_7566;
    pub const INIT: u64 = 0x696e_6974;
    pub const MONTE_CARLO: u64 = 0x6d63_6d63;
    pub const DATA: u64 = 0x6461_7461;
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn stream_id(key: &[u64]) -> u64 {
    key.iter()
        .fold(0x243f_6a88_85a3_08d3, |acc, &k| splitmix(acc ^ splitmix(k)))
}

/// A fresh generator for the stream identified by `key` under `seed`.
pub fn keyed(seed: u64, key: &[u64]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(key));
    rng
}

/// `d` standard normal draws from the stream `(seed, key)`.
pub fn normal_vec(seed: u64, key: &[u64], d: usize) -> Vec<f64> {
    let mut rng = keyed(seed, key);
    (0..d).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// A standard normal sample from an existing generator.
pub fn std_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}
