//! Seed derivation.
//!
//! Every random stream in an experiment is derived from one master seed by
//! hashing `(master, domain, index, sub_index)` through the SplitMix64
//! finaliser. Streams are therefore independent of evaluation order and can be
//! replayed individually.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used for every stream in the crate.
pub type SimRng = ChaCha8Rng;

/// Which kind of stream a derived seed feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Graph = 1,
    Init = 2,
    Dynamics = 3,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed for `(stream, index, sub_index)` under `master`.
pub fn derive_seed(master: u64, stream: Stream, index: u64, sub_index: u64) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ stream as u64);
    h = splitmix64(h ^ index);
    splitmix64(h ^ sub_index.rotate_left(32))
}

/// Seeds of one graph in a sweep.
pub fn graph_seed(master: u64, graph: usize) -> u64 {
    derive_seed(master, Stream::Graph, graph as u64, 0)
}

/// Seeds of one replicate: the initial strategy draw and the dynamics stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ReplicateSeeds {
    pub init: u64,
    pub dynamics: u64,
}

impl ReplicateSeeds {
    pub fn derive(master: u64, graph: usize, realisation: usize) -> Self {
        ReplicateSeeds {
            init: derive_seed(master, Stream::Init, graph as u64, realisation as u64),
            dynamics: derive_seed(master, Stream::Dynamics, graph as u64, realisation as u64),
        }
    }
}

pub fn rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
