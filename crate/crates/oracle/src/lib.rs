//! Test oracles for the fohh crates: an independent proof checker,
//! reference arithmetic, brute-force unifier checks and seeded corpus
//! generators.

pub mod agreement;
pub mod arith;
pub mod canon;
pub mod checker;
pub mod gen;
pub mod grammar;
pub mod mgu;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
