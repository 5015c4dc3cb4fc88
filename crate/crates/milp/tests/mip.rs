use gridsched_milp::generator::random_knapsack;
use gridsched_milp::{
    fix_binaries, solve_lp, solve_mip, solve_mip_with_start, LpStatus, MilpModel, MipStatus, ModelError, NodeOrder,
    Sense, SolverConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exhaustive knapsack optimum over all 2^n item subsets.
fn knapsack_by_enumeration(model: &MilpModel) -> f64 {
    let n = model.num_cols();
    let row = &model.rows()[0];
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|j| f64::from((mask >> j) & 1)).collect();
        if row.activity(&x) <= row.rhs + 1e-12 {
            best = best.min(model.objective_value(&x));
        }
    }
    best
}

/// Small facility location: open facility `f` (binary, fixed cost) to serve
/// continuous demand. Mixed binary/continuous structure similar to a
/// commitment problem.
fn facility_model(seed: u64, facilities: usize, clients: usize) -> MilpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = MilpModel::new();
    let open: Vec<usize> = (0..facilities)
        .map(|f| m.add_column(format!("open{f}"), 0.0, 1.0, rng.gen_range(5.0..30.0), true))
        .collect();
    let caps: Vec<f64> = (0..facilities).map(|_| rng.gen_range(4.0..12.0)).collect();
    let mut served = vec![Vec::new(); facilities];
    for c in 0..clients {
        let demand: f64 = rng.gen_range(1.0..4.0);
        let mut coeffs = Vec::new();
        for f in 0..facilities {
            let j = m.add_column(format!("ship{f}_{c}"), 0.0, f64::INFINITY, rng.gen_range(1.0..6.0), false);
            coeffs.push((j, 1.0));
            served[f].push(j);
        }
        m.add_row(format!("demand{c}"), coeffs, Sense::Ge, demand);
    }
    for f in 0..facilities {
        let mut coeffs: Vec<(usize, f64)> = served[f].iter().map(|&j| (j, 1.0)).collect();
        coeffs.push((open[f], -caps[f]));
        m.add_row(format!("cap{f}"), coeffs, Sense::Le, 0.0);
    }
    m
}

/// Optimum by enumerating every open/closed pattern and solving the
/// remaining LP.
fn facility_by_enumeration(model: &MilpModel) -> f64 {
    let bins = model.binary_columns();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << bins.len()) {
        let assignment: Vec<(usize, bool)> = bins.iter().enumerate().map(|(k, &j)| (j, (mask >> k) & 1 == 1)).collect();
        let fixed = fix_binaries(model, &assignment).unwrap();
        let lp = solve_lp(&fixed, &SolverConfig::default());
        if lp.status == LpStatus::Optimal {
            best = best.min(lp.objective);
        }
    }
    best
}

#[test]
fn knapsacks_match_enumeration() {
    for seed in 0..20 {
        let model = random_knapsack(seed, 5 + (seed as usize % 8));
        let sol = solve_mip(&model, &SolverConfig::default());
        assert_eq!(sol.status, MipStatus::Optimal, "seed {seed}");
        let oracle = knapsack_by_enumeration(&model);
        assert!((sol.objective - oracle).abs() < 1e-6, "seed {seed}: {} vs {oracle}", sol.objective);
    }
}

#[test]
fn facility_location_matches_enumeration() {
    for seed in 0..10 {
        let model = facility_model(seed, 5, 6);
        let oracle = facility_by_enumeration(&model);
        for order in [NodeOrder::BestBound, NodeOrder::DepthFirst] {
            let cfg = SolverConfig {
                node_order: order,
                ..Default::default()
            };
            let sol = solve_mip(&model, &cfg);
            assert_eq!(sol.status, MipStatus::Optimal, "seed {seed}");
            assert!((sol.objective - oracle).abs() <= 1e-6 * (1.0 + oracle.abs()), "seed {seed} {order:?}");
            let x = sol.x.as_ref().unwrap();
            assert!(model.max_violation(x) < 1e-7);
            for j in model.binary_columns() {
                assert!(x[j] == 0.0 || x[j] == 1.0);
            }
        }
    }
}

#[test]
fn fixed_binaries_reduce_to_lp() {
    let model = facility_model(3, 4, 5);
    let assignment: Vec<(usize, bool)> = model.binary_columns().into_iter().map(|j| (j, true)).collect();
    let fixed = fix_binaries(&model, &assignment).unwrap();
    let mip = solve_mip(&fixed, &SolverConfig::default());
    let lp = solve_lp(&fixed, &SolverConfig::default());
    assert_eq!(mip.status, MipStatus::Optimal);
    assert!((mip.objective - lp.objective).abs() < 1e-9);
    assert_eq!(mip.nodes, 1);
}

#[test]
fn fix_binaries_rejects_continuous_columns() {
    let model = facility_model(0, 2, 2);
    let continuous = model.num_cols() - 1;
    assert_eq!(fix_binaries(&model, &[(continuous, true)]).unwrap_err(), ModelError::NotBinary(continuous));
}

#[test]
fn search_is_deterministic() {
    let model = facility_model(11, 6, 6);
    let a = solve_mip(&model, &SolverConfig::default());
    let b = solve_mip(&model, &SolverConfig::default());
    assert_eq!(a.x, b.x);
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.bound_history, b.bound_history);
}

#[test]
fn bounds_are_monotone_and_below_incumbent() {
    for seed in 0..8 {
        let model = facility_model(seed + 40, 6, 5);
        let sol = solve_mip(&model, &SolverConfig::default());
        assert!(sol.root_bound <= sol.objective + 1e-9);
        assert!(sol.best_bound <= sol.objective + 1e-9);
        for w in sol.bound_history.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "seed {seed}: bound decreased {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn start_point_is_used_and_never_worsens_result() {
    let model = facility_model(5, 5, 6);
    let plain = solve_mip(&model, &SolverConfig::default());
    let start = plain.x.clone().unwrap();
    let seeded = solve_mip_with_start(&model, &SolverConfig::default(), Some(&start));
    assert!(seeded.objective <= plain.objective + 1e-9);
    assert!(seeded.nodes <= plain.nodes);
}

#[test]
fn node_limit_reports_status() {
    let model = facility_model(9, 8, 8);
    let cfg = SolverConfig {
        node_limit: Some(2),
        ..Default::default()
    };
    let sol = solve_mip(&model, &cfg);
    assert!(matches!(sol.status, MipStatus::NodeLimit | MipStatus::Optimal));
    assert!(sol.nodes <= 2);
}

#[test]
fn infeasible_mip() {
    let mut m = MilpModel::new();
    let a = m.add_column("a", 0.0, 1.0, 1.0, true);
    let b = m.add_column("b", 0.0, 1.0, 1.0, true);
    m.add_row("odd", vec![(a, 2.0), (b, 2.0)], Sense::Eq, 1.0);
    let sol = solve_mip(&m, &SolverConfig::default());
    assert_eq!(sol.status, MipStatus::Infeasible);
    assert!(sol.x.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_knapsack_optimum_matches_enumeration(seed in 0u64..10_000, items in 1usize..10) {
        let model = random_knapsack(seed, items);
        let sol = solve_mip(&model, &SolverConfig::default());
        prop_assert_eq!(sol.status, MipStatus::Optimal);
        prop_assert!((sol.objective - knapsack_by_enumeration(&model)).abs() < 1e-6);
    }
}
