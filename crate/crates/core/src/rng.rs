//! Seed derivation and keyed random substreams.
//!
//! Every random decision draws from a generator keyed by
//! `(seed, step, entity, purpose)`, so outcomes do not depend on the order in
//! which agents are visited.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

pub type StreamRng = Pcg64Mcg;

/// What a substream is used for; part of the stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Death = 2,
    Cooperation = 3,
    Reproduction = 4,
    FoodRegen = 5,
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a word sequence.
pub fn hash_words(words: &[u64]) -> u64 {
    words.iter().fold(0x6a09_e667_f3bc_c908, |acc, &w| mix64(acc ^ mix64(w)))
}

pub fn substream(seed: u64, step: u64, entity: u64, purpose: Purpose) -> StreamRng {
    StreamRng::seed_from_u64(hash_words(&[seed, step, entity, purpose as u64]))
}

/// Replicate seed for sweep cell `(c, u)`. Independent of grid shape, so
/// extending a grid leaves existing cells untouched.
pub fn replicate_seed(base_seed: u64, c: f64, u: f64, replicate: u64) -> u64 {
    hash_words(&[base_seed, c.to_bits(), u.to_bits(), replicate])
}
