//! Exhaustive commitment enumeration, used as an oracle for branch-and-bound.

use gridsched_milp::{fix_binaries, solve_lp, LpStatus, SolverConfig};

use super::EvaluateError;
use crate::domain::Instance;
use crate::formulation::{build_with, BuildOptions, CaseConfig};
use crate::parallel;

pub const DEFAULT_MAX_PATTERNS: u128 = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    /// Best objective, or `None` when no pattern is feasible.
    pub objective: Option<f64>,
    pub x: Option<Vec<f64>>,
    /// Patterns enumerated, including those rejected without an LP.
    pub patterns: u128,
    pub feasible_patterns: usize,
}

/// Enumerates every assignment of the free commitment binaries, solves the
/// LP with the binaries fixed and keeps the cheapest. Binaries already fixed
/// by bounds (initial must-run or must-stop periods) are not enumerated.
/// Ties keep the lowest pattern number, so the result is deterministic for
/// any thread count.
pub fn brute_force_commitment(
    inst: &Instance,
    case: CaseConfig,
    options: BuildOptions,
    max_patterns: u128,
    solver: &SolverConfig,
) -> Result<BruteForceResult, EvaluateError> {
    let form = build_with(inst, case, options)?;
    let model = &form.model;
    let free: Vec<usize> = model
        .binary_columns()
        .into_iter()
        .filter(|&j| model.columns()[j].lower < model.columns()[j].upper)
        .collect();
    let patterns: u128 = 1u128.checked_shl(free.len() as u32).unwrap_or(u128::MAX);
    if free.len() >= 127 || patterns > max_patterns {
        return Err(EvaluateError::TooManyPatterns {
            patterns,
            limit: max_patterns,
        });
    }

    // Rows over binaries only (min up/down logic) can be screened without
    // an LP; any pattern violating one would give an infeasible LP.
    let is_binary = |j: usize| model.columns()[j].binary;
    let pure_rows: Vec<usize> = (0..model.num_rows())
        .filter(|&i| model.rows()[i].coeffs.iter().all(|&(j, _)| is_binary(j)))
        .collect();
    let fixed_values: Vec<f64> = model.columns().iter().map(|c| c.lower).collect();

    let lp_cfg = SolverConfig { threads: 1, ..solver.clone() };
    let evaluate = |mask: usize| -> Option<(f64, Vec<f64>)> {
        let mut x = fixed_values.clone();
        let mut assignment = Vec::with_capacity(free.len());
        for (bit, &j) in free.iter().enumerate() {
            let on = (mask >> bit) & 1 == 1;
            x[j] = if on { 1.0 } else { 0.0 };
            assignment.push((j, on));
        }
        for &i in &pure_rows {
            let row = &model.rows()[i];
            if row.violation(row.activity(&x)) > 1e-9 {
                return None;
            }
        }
        let fixed = fix_binaries(model, &assignment).expect("free columns are binary");
        let lp = solve_lp(&fixed, &lp_cfg);
        (lp.status == LpStatus::Optimal).then_some((lp.objective, lp.x))
    };
    let results = parallel::map(patterns as usize, solver.threads, evaluate);

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut feasible = 0;
    for (obj, x) in results.into_iter().flatten() {
        feasible += 1;
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, x));
        }
    }
    Ok(BruteForceResult {
        objective: best.as_ref().map(|b| b.0),
        x: best.map(|b| b.1),
        patterns,
        feasible_patterns: feasible,
    })
}
