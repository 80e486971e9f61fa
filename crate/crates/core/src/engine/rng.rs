//! Named deterministic RNG streams.
//!
//! One deployment seed fans out into independent ChaCha streams, one per
//! concern, so adding draws in one subsystem never perturbs another and runs
//! stay bit-reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The independent random streams of a single run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    ApPlacement,
    UePlacement,
    DualSelection,
    ServiceMix,
    Channel,
    Traffic,
    Backoff,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::ApPlacement => 1,
            Stream::UePlacement => 2,
            Stream::DualSelection => 3,
            Stream::ServiceMix => 4,
            Stream::Channel => 5,
            Stream::Traffic => 6,
            Stream::Backoff => 7,
        }
    }
}

/// RNG for one named stream of a deployment seed.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// Sub-stream keyed by an entity id (per-flow traffic, per-AP backoff).
pub fn keyed_stream_rng(seed: u64, stream: Stream, key: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Stream ids are small; shifting the key keeps the spaces disjoint.
    rng.set_stream(stream.id() | (key << 8));
    rng
}
