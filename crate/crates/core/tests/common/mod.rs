#![allow(dead_code)]

use bwk_core::env::{EnvironmentTrace, ProblemDims, Realization};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shape of a random test trace.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub actions: usize,
    pub resources: usize,
    pub horizon: usize,
    pub rho: f64,
    pub seed: u64,
}

pub fn random_trace(shape: Shape, realization: Realization) -> EnvironmentTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(shape.seed);
    let dims = ProblemDims::with_rate(shape.horizon, shape.actions, shape.resources, shape.rho).unwrap();
    let mut trace = EnvironmentTrace::zeros(dims, realization).unwrap();
    for t in 1..=shape.horizon {
        for a in 1..shape.actions {
            trace.set_reward(t, a, rng.gen()).unwrap();
            for i in 0..shape.resources {
                trace.set_consumption(t, i, a, rng.gen()).unwrap();
            }
        }
    }
    trace
}

/// A probability vector of length `n` drawn from `seed`.
pub fn random_dist(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

pub fn max_mixed_consumption(trace: &EnvironmentTrace, dist: &[f64], rounds: std::ops::RangeInclusive<usize>) -> f64 {
    let d = trace.dims().resources;
    rounds
        .flat_map(|t| (0..d).map(move |i| (t, i)))
        .map(|(t, i)| trace.mixed_consumption(t, i, dist))
        .fold(0.0, f64::max)
}
