// SPDX-License-Identifier: Apache-2.0

//! Reproducible per-path random streams.
//!
//! Every simulated path draws from its own ChaCha stream keyed by
//! `(seed, domain, path index)`, so path `i` is the same whatever the thread
//! count or the order in which paths are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent noise sources sharing one user seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Productivity Brownian motion `B^Z` and the initial state `Z_0`.
    Economy,
    /// Idiosyncratic housing Brownian motion `W̄`.
    Housing,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Economy => 0x45_434f_4e4f_4d59,
            Domain::Housing => 0x48_4f55_5349_4e47,
        }
    }
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn path_rng(seed: u64, domain: Domain, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ domain.tag()));
    rng.set_stream(path);
    rng
}
