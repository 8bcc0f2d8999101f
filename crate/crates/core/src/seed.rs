//! Seed derivation. Every random stream in the crate is keyed by a root seed
//! plus a small tuple of integers, so streams are independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(root), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_for(root: u64, path: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(root, path))
}

// Stream tags, kept distinct so that no two consumers share a stream.
pub(crate) const TAG_SAMPLE_BLOCKS: u64 = 1;
pub(crate) const TAG_NEGATIVES: u64 = 2;
pub(crate) const TAG_SHUFFLE: u64 = 3;
pub(crate) const TAG_BATCH: u64 = 4;
pub(crate) const TAG_INIT: u64 = 5;
pub(crate) const TAG_SPLIT: u64 = 6;
pub(crate) const TAG_EVAL_NEG: u64 = 7;
pub(crate) const TAG_CV_CAP: u64 = 8;
pub(crate) const TAG_SYNTH: u64 = 9;
pub(crate) const TAG_IVF: u64 = 10;
