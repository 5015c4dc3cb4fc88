//! Seeded generators of random test problems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{MilpModel, Sense};

/// A dense LP that is feasible by construction (a random interior point
/// satisfies every row) and bounded (every column is boxed).
pub fn random_bounded_lp(seed: u64, rows: usize, cols: usize) -> MilpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = MilpModel::new();
    let mut point = Vec::with_capacity(cols);
    for j in 0..cols {
        let lo: f64 = rng.gen_range(-5.0..0.0);
        let hi: f64 = lo + rng.gen_range(0.5..10.0);
        let cost: f64 = rng.gen_range(-10.0..10.0);
        point.push(rng.gen_range(lo..hi));
        model.add_column(format!("x{j}"), lo, hi, cost, false);
    }
    for i in 0..rows {
        let coeffs: Vec<(usize, f64)> = (0..cols)
            .filter_map(|j| {
                if rng.gen_bool(0.8) {
                    Some((j, rng.gen_range(-5.0..5.0)))
                } else {
                    None
                }
            })
            .collect();
        let act: f64 = coeffs.iter().map(|&(j, a)| a * point[j]).sum();
        let (sense, rhs) = match rng.gen_range(0..5) {
            0 => (Sense::Eq, act),
            1 | 2 => (Sense::Le, act + rng.gen_range(0.0..3.0)),
            _ => (Sense::Ge, act - rng.gen_range(0.0..3.0)),
        };
        model.add_row(format!("r{i}"), coeffs, sense, rhs);
    }
    model
}

/// A 0/1 knapsack with `items` binaries: maximize value (as a minimization
/// of negated value) under a single weight limit.
pub fn random_knapsack(seed: u64, items: usize) -> MilpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = MilpModel::new();
    let mut weights = Vec::new();
    for j in 0..items {
        let value: f64 = rng.gen_range(1.0..20.0);
        weights.push((j, rng.gen_range(1.0..10.0)));
        model.add_column(format!("y{j}"), 0.0, 1.0, -value, true);
    }
    let total: f64 = weights.iter().map(|w| w.1).sum();
    model.add_row("cap", weights, Sense::Le, 0.45 * total);
    model
}
