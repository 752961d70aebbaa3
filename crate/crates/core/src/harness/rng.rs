//! Counter-derived random streams.
//!
//! Each stream is seeded from `(master_seed, realization, purpose)` alone, so
//! any realization can be regenerated in isolation and in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::optimizers::Algorithm;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Placement,
    Channel,
    /// One stream per transmit power and algorithm, shared by the fairness levels.
    Optimizer { p_t_index: usize, algorithm: Algorithm },
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            Self::Placement => 1,
            Self::Channel => 2,
            Self::Optimizer { p_t_index, algorithm } => {
                let alg = Algorithm::ALL.iter().position(|a| *a == algorithm).unwrap() as u64;
                0x100 + ((p_t_index as u64) << 8) + alg
            }
        }
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream_seed(master_seed: u64, realization: usize, purpose: StreamPurpose) -> u64 {
    let h = splitmix64(master_seed);
    let h = splitmix64(h ^ realization as u64);
    splitmix64(h ^ purpose.tag())
}

pub fn child_rng(master_seed: u64, realization: usize, purpose: StreamPurpose) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master_seed, realization, purpose))
}
