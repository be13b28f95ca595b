//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by
//! `(seed, domain, indices...)`. Two calls with the same key replay the same
//! numbers regardless of call order or thread, which is what makes traces
//! byte-for-byte reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent purposes a stream can be drawn for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    LinkMask = 1,
    Minibatch = 2,
    TaskData = 3,
    ModelInit = 4,
    Placement = 5,
    Eigenvector = 6,
    MonteCarlo = 7,
    Sampling = 8,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a seed with a domain tag and an index path into one 64-bit key.
pub fn derive_key(seed: u64, domain: Domain, indices: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ splitmix64(domain as u64));
    for &ix in indices {
        h = splitmix64(h ^ splitmix64(ix.wrapping_add(GOLDEN)));
    }
    h
}

pub fn stream(seed: u64, domain: Domain, indices: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_key(seed, domain, indices))
}
