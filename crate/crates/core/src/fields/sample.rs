//! Quasi-random sample points inside a chart box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ChartDomain;

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

pub const DEFAULT_SAMPLES: usize = 25;

fn radical_inverse(mut n: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while n > 0 {
        out += (n % base as u64) as f64 * inv;
        n /= base as u64;
        inv /= b;
    }
    out
}

/// `n` Halton points with a seeded Cranley-Patterson rotation, mapped into
/// the open interior of `domain` (a 2% margin on each side).
pub fn sample_points(domain: &ChartDomain, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = domain.dim();
    assert!(d <= PRIMES.len(), "sampling supports dimension up to {}", PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5a3b_1e00_0000);
    let shift: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    (1..=n as u64)
        .map(|k| {
            (0..d)
                .map(|a| {
                    let u = (radical_inverse(k, PRIMES[a]) + shift[a]).fract();
                    let u = 0.02 + 0.96 * u;
                    domain.lower[a] + u * (domain.upper[a] - domain.lower[a])
                })
                .collect()
        })
        .collect()
}
