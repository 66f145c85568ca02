//! Counter-based seed derivation.
//!
//! Every random draw in the crate comes from a generator seeded by
//! `derive_seed(root, path)`, where `path` names the consumer (trial index,
//! restart index, ...). Restart 3 of trial 17 therefore sees the same stream
//! no matter how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream tags, mixed into the derivation path so that different consumers
/// of the same index never share a stream.
pub mod stream {
    pub const TRIAL: u64 = 0x7472_6961_6c00_0001;
    pub const RESTART: u64 = 0x7265_7374_6172_0002;
    pub const INIT: u64 = 0x696e_6974_0000_0003;
    pub const SPLIT: u64 = 0x7370_6c69_7400_0004;
    pub const FIXTURE: u64 = 0x6669_7874_7572_0005;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(root: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(root), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng_for(root: u64, path: &[u64]) -> Rng {
    Rng::seed_from_u64(derive_seed(root, path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn derivation_is_reproducible_and_path_sensitive() {
        assert_eq!(derive_seed(7, &[1, 2]), derive_seed(7, &[1, 2]));
        assert_ne!(derive_seed(7, &[1, 2]), derive_seed(7, &[2, 1]));
        assert_ne!(derive_seed(7, &[1]), derive_seed(8, &[1]));
        let a: u64 = rng_for(3, &[stream::TRIAL, 5]).random();
        let b: u64 = rng_for(3, &[stream::TRIAL, 5]).random();
        assert_eq!(a, b);
    }
}
