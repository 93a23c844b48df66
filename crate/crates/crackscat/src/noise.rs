//! Multiplicative measurement noise: U_delta = U + delta (zeta1 + i zeta2)|U|
//! with zeta1, zeta2 ~ Uniform[-1, 1], drawn per sample from a seeded ChaCha8
//! stream so noisy runs reproduce bit-for-bit across platforms.

use num_complex::Complex64;
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Uniform draw in [-1, 1] with full 53-bit mantissa resolution.
fn uniform_pm1(rng: &mut ChaCha8Rng) -> f64 {
    let u = rng.next_u64() >> 11; // 53 random bits
    (u as f64) / (1u64 << 53) as f64 * 2.0 - 1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NoisyFarField {
    pub base: Vec<Complex64>,
    pub delta: f64,
    pub seed: u64,
    pub values: Vec<Complex64>,
}

/// Perturb a far-field pattern by relative noise level delta. delta = 0
/// returns the base values bit-exactly (no RNG draws at all).
pub fn add_noise(base: &[Complex64], delta: f64, seed: u64) -> NoisyFarField {
    assert!(delta >= 0.0, "noise level must be nonnegative");
    let values = if delta == 0.0 {
        base.to_vec()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        base.iter()
            .map(|&u| {
                let z1 = uniform_pm1(&mut rng);
                let z2 = uniform_pm1(&mut rng);
                u + delta * Complex64::new(z1, z2) * u.norm()
            })
            .collect()
    };
    NoisyFarField {
        base: base.to_vec(),
        delta,
        seed,
        values,
    }
}
