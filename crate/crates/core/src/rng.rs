//! Keyed random streams.
//!
//! Every stochastic draw in a run comes from a generator derived from the run
//! seed plus a stream tag and a short key (annotator id, day, iteration...).
//! Two runs that share a seed therefore see the same draws for the same key
//! no matter which annotators were selected along the way.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Population,
    SeedSet,
    Mood,
    Label,
    Forest,
    Subsample,
    Holdout,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Population => 0x706f_7075,
            Stream::SeedSet => 0x7365_6564,
            Stream::Mood => 0x6d6f_6f64,
            Stream::Label => 0x6c61_6265,
            Stream::Forest => 0x666f_7265,
            Stream::Subsample => 0x7375_6273,
            Stream::Holdout => 0x686f_6c64,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed, a stream tag and a key path into one 64-bit seed.
pub fn derive_seed(seed: u64, stream: Stream, keys: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ stream.tag());
    for &k in keys {
        h = splitmix64(h ^ k);
    }
    h
}

pub fn stream(seed: u64, stream: Stream, keys: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(seed, stream, keys))
}
