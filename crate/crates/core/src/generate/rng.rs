//! Counter-based seeding: every trial gets its own generator derived from
//! the run seed, so results never depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes the run seed with any number of counters.
pub fn trial_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix(seed), |acc, &p| splitmix(acc ^ splitmix(p)))
}

/// Generator for `(seed, dim, trial)` with an extra salt naming the
/// consumer (a proposition id hash, for instance).
pub fn trial_rng(seed: u64, dim: usize, trial: usize, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(seed, &[dim as u64, trial as u64, salt]))
}

/// Stable 64-bit hash of a label, used as an RNG salt.
pub fn label_salt(label: &str) -> u64 {
    label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325_u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}
