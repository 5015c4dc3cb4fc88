use gridsched_milp::generator::random_bounded_lp;
use gridsched_milp::{farkas_certifies, solve_lp, LpStatus, MilpModel, Sense, SolverConfig};

/// Dual objective recomputed from the returned row duals alone:
/// `sum_i y_i * (active row bound) + sum_j d_j * (active column bound)`
/// with `d = c - A^T y`. Returns `None` when a nonzero multiplier sits on an
/// infinite bound (dual infeasible).
fn dual_objective(model: &MilpModel, y: &[f64]) -> Option<f64> {
    let mut d: Vec<f64> = model.columns().iter().map(|c| c.cost).collect();
    for (i, row) in model.rows().iter().enumerate() {
        for &(j, a) in &row.coeffs {
            d[j] -= a * y[i];
        }
    }
    let mut total = 0.0;
    for (i, row) in model.rows().iter().enumerate() {
        let (lo, hi) = row.activity_bounds();
        let b = if y[i] > 0.0 { lo } else { hi };
        if y[i] != 0.0 {
            if !b.is_finite() {
                if y[i].abs() > 1e-9 {
                    return None;
                }
                continue;
            }
            total += y[i] * b;
        }
    }
    for (j, c) in model.columns().iter().enumerate() {
        let b = if d[j] > 0.0 { c.lower } else { c.upper };
        if d[j] != 0.0 {
            if !b.is_finite() {
                if d[j].abs() > 1e-9 {
                    return None;
                }
                continue;
            }
            total += d[j] * b;
        }
    }
    Some(total)
}

/// Largest complementarity product between multipliers and the distance of
/// the primal point to the bound each multiplier is attached to.
fn complementarity(model: &MilpModel, x: &[f64], y: &[f64]) -> f64 {
    let mut d: Vec<f64> = model.columns().iter().map(|c| c.cost).collect();
    for (i, row) in model.rows().iter().enumerate() {
        for &(j, a) in &row.coeffs {
            d[j] -= a * y[i];
        }
    }
    let mut worst = 0.0f64;
    for (i, row) in model.rows().iter().enumerate() {
        let act = row.activity(x);
        let (lo, hi) = row.activity_bounds();
        let gap = if y[i] > 0.0 { act - lo } else { hi - act };
        if y[i] != 0.0 {
            worst = worst.max((y[i] * gap).abs());
        }
    }
    for (j, c) in model.columns().iter().enumerate() {
        let gap = if d[j] > 0.0 { x[j] - c.lower } else { c.upper - x[j] };
        if d[j] != 0.0 {
            worst = worst.max((d[j] * gap).abs());
        }
    }
    worst
}

#[test]
fn single_lower_bounded_variable() {
    let mut m = MilpModel::new();
    let x = m.add_column("x", f64::NEG_INFINITY, 10.0, 1.0, false);
    m.add_row("r", vec![(x, 1.0)], Sense::Ge, 3.0);
    let sol = solve_lp(&m, &SolverConfig::default());
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.x[0] - 3.0).abs() < 1e-12);
    assert!((sol.objective - 3.0).abs() < 1e-12);
    assert!((sol.duals[0] - 1.0).abs() < 1e-12);
}

#[test]
fn symmetric_face_resolves_to_lowest_index_vertex() {
    let mut m = MilpModel::new();
    let x = m.add_column("x", 0.0, 1.0, -1.0, false);
    let y = m.add_column("y", 0.0, 1.0, -1.0, false);
    m.add_row("sum", vec![(x, 1.0), (y, 1.0)], Sense::Le, 1.0);
    let sol = solve_lp(&m, &SolverConfig::default());
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective + 1.0).abs() < 1e-12);
    assert_eq!(sol.x, vec![1.0, 0.0]);
}

#[test]
fn random_lps_satisfy_strong_duality_and_complementarity() {
    let cfg = SolverConfig::default();
    for seed in 0..50u64 {
        let rows = 5 + (seed as usize % 4) * 5;
        let cols = 8 + (seed as usize % 5) * 6;
        let model = random_bounded_lp(seed, rows, cols);
        let sol = solve_lp(&model, &cfg);
        assert_eq!(sol.status, LpStatus::Optimal, "seed {seed}");
        assert!(sol.iterations < 100_000, "seed {seed}");
        let viol = model.max_violation(&sol.x);
        assert!(viol <= 1e-8 * 10.0, "seed {seed} primal residual {viol}");
        let primal = model.objective_value(&sol.x);
        let dual = dual_objective(&model, &sol.duals).expect("dual feasible");
        assert!(
            (primal - dual).abs() <= 1e-7 * (1.0 + primal.abs()),
            "seed {seed}: primal {primal} dual {dual}"
        );
        let cs = complementarity(&model, &sol.x, &sol.duals);
        assert!(cs <= 1e-7, "seed {seed}: complementarity {cs}");
    }
}

#[test]
fn infeasible_lp_has_farkas_certificate() {
    let mut m = MilpModel::new();
    let x = m.add_column("x", 0.0, 4.0, 1.0, false);
    let y = m.add_column("y", 0.0, 4.0, 1.0, false);
    m.add_row("a", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 5.0);
    m.add_row("b", vec![(x, 1.0), (y, -1.0)], Sense::Eq, 0.0);
    m.add_row("c", vec![(x, 1.0)], Sense::Le, 2.0);
    let sol = solve_lp(&m, &SolverConfig::default());
    assert_eq!(sol.status, LpStatus::Infeasible);
    let ray = sol.farkas.expect("certificate");
    assert!(farkas_certifies(&m, &ray, 1e-9));
}

#[test]
fn infeasible_without_presolve_or_scaling() {
    let mut m = MilpModel::new();
    let x = m.add_column("x", 1.0, 1.0, 0.0, false);
    let y = m.add_column("y", 0.0, 1.0, 0.0, false);
    m.add_row("r", vec![(x, 2.0), (y, 1.0)], Sense::Le, 1.5);
    for presolve in [true, false] {
        let cfg = SolverConfig {
            presolve,
            scaling: presolve,
            ..Default::default()
        };
        let sol = solve_lp(&m, &cfg);
        assert_eq!(sol.status, LpStatus::Infeasible);
        assert!(farkas_certifies(&m, sol.farkas.as_ref().unwrap(), 1e-9));
    }
}

#[test]
fn unbounded_lp_returns_improving_ray() {
    let mut m = MilpModel::new();
    let x = m.add_column("x", 0.0, f64::INFINITY, -1.0, false);
    let y = m.add_column("y", 0.0, f64::INFINITY, 0.0, false);
    m.add_row("r", vec![(x, 1.0), (y, -1.0)], Sense::Le, 2.0);
    let sol = solve_lp(&m, &SolverConfig::default());
    assert_eq!(sol.status, LpStatus::Unbounded);
    let ray = sol.ray.expect("ray");
    let slope: f64 = m.columns().iter().zip(&ray).map(|(c, r)| c.cost * r).sum();
    assert!(slope < 0.0);
    // Moving along the ray keeps the row satisfied.
    let moved: Vec<f64> = sol.x.iter().zip(&ray).map(|(a, r)| a + 100.0 * r).collect();
    assert!(m.max_violation(&moved) < 1e-9);
}

#[test]
fn free_variables_and_equalities() {
    // min |a| + |b| style: a - b = 3 with a, b free, split through bounds.
    let mut m = MilpModel::new();
    let a = m.add_column("a", f64::NEG_INFINITY, f64::INFINITY, 0.0, false);
    let p = m.add_column("p", 0.0, f64::INFINITY, 1.0, false);
    let n = m.add_column("n", 0.0, f64::INFINITY, 1.0, false);
    m.add_row("split", vec![(a, 1.0), (p, -1.0), (n, 1.0)], Sense::Eq, 0.0);
    m.add_row("pin", vec![(a, 1.0)], Sense::Eq, -3.0);
    let sol = solve_lp(&m, &SolverConfig::default());
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!((sol.objective - 3.0).abs() < 1e-9);
    assert!((sol.x[n] - 3.0).abs() < 1e-9);
}

#[test]
fn deterministic_across_runs() {
    let model = random_bounded_lp(7, 15, 25);
    let a = solve_lp(&model, &SolverConfig::default());
    let b = solve_lp(&model, &SolverConfig::default());
    assert_eq!(a.x, b.x);
    assert_eq!(a.duals, b.duals);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn bland_fallback_still_terminates() {
    let cfg = SolverConfig {
        stall_limit: 0,
        ..Default::default()
    };
    for seed in 100..110 {
        let model = random_bounded_lp(seed, 12, 20);
        let reference = solve_lp(&model, &SolverConfig::default());
        let sol = solve_lp(&model, &cfg);
        assert_eq!(sol.status, LpStatus::Optimal, "seed {seed}");
        assert!((sol.objective - reference.objective).abs() <= 1e-7 * (1.0 + reference.objective.abs()));
    }
}
