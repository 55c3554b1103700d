//! Lattice white noise with counter-based per-node streams.

use super::grid::GridSpec3;
use crate::rng::CounterRng;
use rayon::prelude::*;

/// I.i.d. centered Gaussians with variance `1 / cell_volume` at each node,
/// so `<W, phi> ~ sum W phi dV` has variance `~ ||phi||_{L^2}^2` under
/// Riemann-sum pairing. Each node draws from its own `(seed, node)` stream;
/// the result is independent of iteration order and thread count.
pub fn sample_white_noise(grid: &GridSpec3, seed: u64) -> Vec<f64> {
    let sigma = 1.0 / grid.cell_volume().sqrt();
    (0..grid.node_count())
        .into_par_iter()
        .map(|idx| sigma * CounterRng::new(seed, idx as u64).normal())
        .collect()
}
