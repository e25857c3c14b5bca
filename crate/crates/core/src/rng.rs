//! Seedable generator used by every stochastic routine.
//!
//! ChaCha8 has a fixed, platform-independent output stream for a given seed,
//! so fits, clusterings and embeddings reproduce bit-for-bit across machines.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type HadesRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> HadesRng {
    ChaCha8Rng::seed_from_u64(seed)
}
