//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a ChaCha20 generator keyed by a
//! `(base seed, replication, stream)` triple: the first two fill the 256-bit
//! key (little-endian, zero padded) and the third selects the ChaCha stream.
//! Replications therefore never share state, and results do not depend on the
//! order or thread in which replications run. Normal variates use the
//! ziggurat sampler of `rand_distr::StandardNormal`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type StudyRng = ChaCha20Rng;

/// Named streams used by the simulation harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Design = 0,
    Noise = 1,
    Coefficients = 2,
    Auxiliary = 3,
}

pub fn stream_rng(base: u64, replication: u64, stream: Stream) -> StudyRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&base.to_le_bytes());
    key[8..16].copy_from_slice(&replication.to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(stream as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream_rng(7, 3, Stream::Noise).random();
        let b: u64 = stream_rng(7, 3, Stream::Noise).random();
        let c: u64 = stream_rng(7, 3, Stream::Design).random();
        let d: u64 = stream_rng(7, 4, Stream::Noise).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
