//! Randomized positive initial directions: mixtures of three Gaussian bumps
//! over a small domain-wide floor.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Grid, GridFunction};

/// Independent stream per start, so a start's direction does not depend on
/// how many starts run or in which order.
pub fn start_rng(seed: u64, start_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start_index as u64);
    rng
}

/// `Σ_k amp_k·exp(−((x − c_k)/σ_k)²) + floor·(1 − x²)^{1/2}`.
pub fn bump_mixture(grid: &Arc<Grid>, rng: &mut impl Rng, floor: f64) -> GridFunction {
    let bumps: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.5..1.5),
                rng.gen_range(-0.8..0.8),
                rng.gen_range(0.1..0.6),
            )
        })
        .collect();
    GridFunction::from_fn(Arc::clone(grid), |x| {
        let bumps: f64 = bumps
            .iter()
            .map(|&(amp, c, sigma)| amp * (-((x - c) / sigma).powi(2)).exp())
            .sum();
        bumps + floor * (1.0 - x * x).sqrt()
    })
    .expect("finite bump mixture")
}
