//! Seed derivation.
//!
//! Every random stage draws from its own generator, seeded by hashing the
//! root seed together with a stage name and integer coordinates:
//!
//! ```text
//! seed = first 8 bytes (LE) of SHA-256(root_le || stage_utf8 || 0x00 || coord_le...)
//! ```
//!
//! A single grid cell can therefore be re-run in isolation and produces the
//! same numbers it produced inside a full grid run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Generator used throughout the crate. ChaCha keeps streams identical
/// across platforms and crate versions.
pub type Rng = ChaCha8Rng;

pub fn derive_seed(root: u64, stage: &str, coords: &[u64]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(stage.as_bytes());
    hasher.update([0u8]);
    for c in coords {
        hasher.update(c.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub fn stage_rng(root: u64, stage: &str, coords: &[u64]) -> Rng {
    rng(derive_seed(root, stage, coords))
}

/// Noise proportions enter seeds as integer permille so 0.2 and 0.20000001
/// don't silently diverge.
pub fn permille(proportion: f64) -> u64 {
    (proportion * 1000.0).round().max(0.0) as u64
}
