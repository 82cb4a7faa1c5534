//! Shared fixtures for the criterion benches.

use saga_core::data::random_features;
use saga_core::graph::gen_powerlaw;
use saga_core::{Graph, Matrix};

pub const SEED: u64 = 7;

/// Power-law graph with `n` vertices and average in-degree 3, plus
/// `dim`-wide features.
pub fn powerlaw_fixture(n: usize, dim: usize) -> (Graph, Matrix) {
    let g = gen_powerlaw(n, 3.0, 2.5, SEED).expect("valid generator parameters");
    let x = random_features(n, dim, SEED);
    (g, x)
}
