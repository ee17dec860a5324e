//! Keyed random streams.
//!
//! Every draw in the sampler comes from a ChaCha stream whose key is built
//! from `(seed, sweep, purpose)` and whose 64-bit stream id is the entity
//! index. ChaCha is a counter-mode generator, so each `(key, stream)` pair
//! is an independent sequence and the order in which workers consume
//! streams has no effect on the values they see.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. Folded into the key so streams for different
/// purposes never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Init { mode: usize },
    Latents { mode: usize },
    Hyper { mode: usize },
    Split,
    Simulate,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Init { mode } => 0x100 + mode as u64,
            Purpose::Latents { mode } => 0x200 + mode as u64,
            Purpose::Hyper { mode } => 0x300 + mode as u64,
            Purpose::Split => 0x400,
            Purpose::Simulate => 0x500,
        }
    }
}

/// Independent stream for `(seed, sweep, purpose, entity)`.
pub fn stream(seed: u64, sweep: u64, purpose: Purpose, entity: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&sweep.to_le_bytes());
    key[16..24].copy_from_slice(&purpose.tag().to_le_bytes());
    key[24..32].copy_from_slice(b"tfstream");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(entity);
    rng
}
