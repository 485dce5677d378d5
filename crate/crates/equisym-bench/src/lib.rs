//! Shared input generation for the criterion micro-benchmarks.

use equisym::ParticleConfig;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Deterministic batch of particle configurations drawn uniformly from
/// [-2, 2]^{n*d}. The fixed seed keeps benchmark inputs identical across
/// runs so timing differences reflect the code, not the data.
pub fn sample_configs(n: usize, d: usize, count: usize, seed: u64) -> Vec<ParticleConfig> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let entries = (0..n * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            ParticleConfig::new(d, n, entries).expect("valid shape by construction")
        })
        .collect()
}
