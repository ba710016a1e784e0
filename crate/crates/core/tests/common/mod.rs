#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

/// Deterministic grid of (spot, strike, maturity, rate, vol).
pub fn pricing_grid(n: usize, seed: u64) -> Vec<(f64, f64, f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (
                rng.gen_range(10.0..500.0),
                rng.gen_range(10.0..500.0),
                rng.gen_range(0.1..10.0),
                rng.gen_range(-0.02..0.10),
                rng.gen_range(0.01..1.0),
            )
        })
        .collect()
}
