//! Seeded synthetic graph generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, Graph};
use crate::error::{Error, Result};

/// Parameters of [`gen_powerlaw`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawConfig {
    pub num_vertices: usize,
    pub avg_degree: f64,
    pub alpha: f64,
}

/// Directed graph whose in-degrees follow a discrete power law.
///
/// Each vertex draws a raw weight `k` from a zeta distribution with exponent
/// `alpha`, truncated to `1..=n-1`. Weights are scaled so their total is
/// `n · avg_deg` and rounded stochastically into in-degree targets; each
/// in-stub is then matched with a uniformly random source. The final edge
/// list is shuffled so edge ids carry no degree information.
pub fn gen_powerlaw(n: usize, avg_deg: f64, alpha: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "power-law graph needs n >= 2, got {n}"
        )));
    }
    if !(avg_deg.is_finite() && avg_deg > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "avg_deg must be > 0, got {avg_deg}"
        )));
    }
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be > 1, got {alpha}"
        )));
    }
    if n > u32::MAX as usize {
        return Err(Error::InvalidParameter("n exceeds 32-bit id space".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let kmax = n - 1;
    let mut cdf = Vec::with_capacity(kmax);
    let mut acc = 0.0f64;
    for k in 1..=kmax {
        acc += (k as f64).powf(-alpha);
        cdf.push(acc);
    }
    let raw: Vec<usize> = (0..n)
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            cdf.partition_point(|&c| c < u).min(kmax - 1) + 1
        })
        .collect();

    let target = (n as f64 * avg_deg).round();
    let scale = target / raw.iter().sum::<usize>() as f64;
    let mut edges = Vec::with_capacity(target as usize + n);
    for (v, &k) in raw.iter().enumerate() {
        let want = scale * k as f64;
        let mut deg = want.floor() as usize;
        if rng.gen::<f64>() < want - want.floor() {
            deg += 1;
        }
        for _ in 0..deg {
            let src = rng.gen_range(0..n) as u32;
            edges.push(Edge::new(src, v as u32));
        }
    }
    edges.shuffle(&mut rng);
    Graph::from_edges(edges, n)
}

/// `m` edges with independently uniform endpoints.
pub fn gen_uniform(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidParameter("uniform graph needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (0..m)
        .map(|_| Edge::new(rng.gen_range(0..n) as u32, rng.gen_range(0..n) as u32))
        .collect();
    Graph::from_edges(edges, n)
}

impl PowerLawConfig {
    pub fn generate(&self, seed: u64) -> Result<Graph> {
        gen_powerlaw(self.num_vertices, self.avg_degree, self.alpha, seed)
    }
}

/// Assign each edge a uniformly random relation in `0..num_etypes`.
pub fn random_edge_types(g: &Graph, num_etypes: usize, seed: u64) -> Result<Graph> {
    if num_etypes == 0 {
        return Err(Error::InvalidParameter("num_etypes must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_e7e5);
    let types: Vec<u32> = (0..g.num_edges())
        .map(|_| rng.gen_range(0..num_etypes) as u32)
        .collect();
    g.with_edge_types(&types, num_etypes)
}
