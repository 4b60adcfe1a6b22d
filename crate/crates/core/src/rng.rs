//! Seeded randomness shared by augmentation, mixing and noise simulation.
//!
//! Every generator is ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded through
//! `SeedableRng::seed_from_u64` and separated into independent streams with
//! `set_stream`. Uniform reals come from `rand`'s `Standard` distribution
//! (53 random mantissa bits). Streams are derived from a base seed plus a
//! label, so the same inputs reproduce on every platform and regardless of
//! processing order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for item `index` of a sequence processed under `seed`.
pub fn indexed(seed: u64, index: u64) -> Rng {
    let mut rng = seeded(seed);
    rng.set_stream(index);
    rng
}

/// Generator keyed by a string label (a document id, say) and a purpose tag.
pub fn labelled(seed: u64, purpose: &str, label: &str) -> Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update((purpose.len() as u64).to_le_bytes());
    hasher.update(purpose.as_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(bytes)
}

/// A `u64` seed for a sub-task, drawn from [`labelled`].
pub fn sub_seed(seed: u64, purpose: &str, label: &str) -> u64 {
    labelled(seed, purpose, label).next_u64()
}
