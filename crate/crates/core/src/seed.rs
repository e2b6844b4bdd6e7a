//! Seed derivation for reproducible, paired experiments.

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes three words into one seed by chained SplitMix64 rounds.
#[inline]
pub fn mix_seed(a: u64, b: u64, c: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(a) ^ b) ^ c)
}

const TREE_SALT: u64 = 0x7472_6565_7365_6564; // "treeseed"
const TRIAL_SALT: u64 = 0x7472_6961_6c73_6564; // "trialsed"

/// Seed of the stream that generates tree `index`.
pub fn tree_seed(master: u64, index: u64) -> u64 {
    mix_seed(master, index, TREE_SALT)
}

/// Seed of the stream that drives trials on tree `index`. Shared by every
/// algorithm so that policies with identical sampling rules take identical paths.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    mix_seed(master, index, TRIAL_SALT)
}
