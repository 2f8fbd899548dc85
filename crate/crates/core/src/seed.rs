//! Seed derivation for independent experiment cells.
//!
//! Every `(n, rep)` cell of an experiment gets its own generator whose seed is
//! a splitmix64 hash of `(master_seed, n, rep)`. Cells never share a generator,
//! so the result of a cell does not depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used everywhere in the crate.
pub type Rng = ChaCha8Rng;

/// One round of the splitmix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of cell `(n, rep)` from a master seed.
pub fn derive_seed(master: u64, n: u64, rep: u64) -> u64 {
    let a = splitmix64(master);
    let b = splitmix64(a ^ n.wrapping_mul(0xD1B5_4A32_D192_ED03));
    splitmix64(b ^ rep.wrapping_mul(0x8CB9_2BA7_2F3D_8DD7))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub fn cell_rng(master: u64, n: u64, rep: u64) -> Rng {
    rng_from_seed(derive_seed(master, n, rep))
}
