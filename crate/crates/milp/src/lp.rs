//! LP relaxation solve with primal and dual certificates.

use crate::config::SolverConfig;
use crate::model::MilpModel;
use crate::presolve::{reduce, ReducedLp};
use crate::simplex::{Engine, EngineConfig, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NumericalFailure,
}

impl From<Status> for LpStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Optimal => LpStatus::Optimal,
            Status::Infeasible => LpStatus::Infeasible,
            Status::Unbounded => LpStatus::Unbounded,
            Status::IterationLimit => LpStatus::IterationLimit,
            Status::NumericalFailure => LpStatus::NumericalFailure,
        }
    }
}

/// Result of [`solve_lp`]. Vectors are in the caller's column and row
/// numbering; duals follow the convention `c = A^T y + d`.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    /// Row multipliers `y` for which `y^T A x` cannot match any admissible
    /// combination of row activities (see [`farkas_certifies`]).
    pub farkas: Option<Vec<f64>>,
    /// Improving direction over the columns when unbounded.
    pub ray: Option<Vec<f64>>,
    pub iterations: usize,
}

impl LpSolution {
    fn empty(model: &MilpModel, status: LpStatus) -> Self {
        Self {
            status,
            x: vec![0.0; model.num_cols()],
            duals: vec![0.0; model.num_rows()],
            reduced_costs: vec![0.0; model.num_cols()],
            objective: f64::NAN,
            farkas: None,
            ray: None,
            iterations: 0,
        }
    }
}

pub(crate) fn engine_config(cfg: &SolverConfig) -> EngineConfig {
    EngineConfig {
        feas_tol: cfg.feas_tol,
        opt_tol: cfg.opt_tol,
        stall_limit: cfg.stall_limit,
        iteration_limit: cfg.iteration_limit,
    }
}

/// Builds the computational form, or the infeasibility certificate when
/// presolve alone proves infeasibility.
pub(crate) fn prepare(model: &MilpModel, cfg: &SolverConfig) -> Result<ReducedLp, LpSolution> {
    reduce(model, cfg.presolve, cfg.scaling, cfg.feas_tol).map_err(|inf| {
        let mut sol = LpSolution::empty(model, LpStatus::Infeasible);
        let mut y = vec![0.0; model.num_rows()];
        y[inf.row] = inf.side;
        sol.farkas = Some(y);
        sol
    })
}

/// Solves the LP relaxation of `model` (binary flags ignored).
pub fn solve_lp(model: &MilpModel, cfg: &SolverConfig) -> LpSolution {
    let lp = match prepare(model, cfg) {
        Ok(lp) => lp,
        Err(sol) => return sol,
    };
    let mut engine = Engine::new(lp, engine_config(cfg));
    let status = engine.primal();
    extract(model, &mut engine, status.into())
}

/// Primal values of the engine mapped to the caller's numbering; columns
/// removed by presolve take their fixed value.
pub(crate) fn primal_values(model: &MilpModel, engine: &Engine) -> Vec<f64> {
    let lp = &engine.lp;
    let mut x: Vec<f64> = model
        .columns()
        .iter()
        .map(|c| if c.lower == c.upper { c.lower } else { c.lower.max(c.upper.min(0.0)) })
        .collect();
    for (k, &j) in lp.col_map.iter().enumerate() {
        x[j] = engine.x[k] * lp.col_scale[k];
    }
    x
}

/// Maps the engine state back to the caller's numbering.
pub(crate) fn extract(model: &MilpModel, engine: &mut Engine, status: LpStatus) -> LpSolution {
    let x = primal_values(model, engine);
    let ys = if status == LpStatus::Optimal { Some(engine.duals()) } else { None };
    let lp = &engine.lp;
    let mut sol = LpSolution::empty(model, status);
    sol.iterations = engine.iterations;
    let to_rows = |scaled: &[f64]| {
        let mut y = vec![0.0; model.num_rows()];
        for (k, &i) in lp.row_map.iter().enumerate() {
            y[i] = scaled[k] * lp.row_scale[k];
        }
        y
    };
    match status {
        LpStatus::Optimal => {
            let y = to_rows(ys.as_deref().unwrap_or(&[]));
            let mut d: Vec<f64> = model.columns().iter().map(|c| c.cost).collect();
            for (i, row) in model.rows().iter().enumerate() {
                if y[i] != 0.0 {
                    for &(j, a) in &row.coeffs {
                        d[j] -= a * y[i];
                    }
                }
            }
            sol.objective = model.objective_value(&x);
            sol.duals = y;
            sol.reduced_costs = d;
        }
        LpStatus::Infeasible => {
            sol.farkas = engine.farkas.as_ref().map(|f| to_rows(f));
        }
        LpStatus::Unbounded => {
            if let Some(ray) = &engine.ray {
                let mut r = vec![0.0; model.num_cols()];
                for (k, &j) in lp.col_map.iter().enumerate() {
                    r[j] = ray[k] * lp.col_scale[k];
                }
                sol.ray = Some(r);
            }
        }
        _ => {}
    }
    sol.x = x;
    sol
}

/// Checks a Farkas certificate: with `g = A^T y`, the range of `g^T x` over
/// the column box must be disjoint from the range of `y^T r` over the row
/// activity bounds. Either orientation of `y` is accepted.
pub fn farkas_certifies(model: &MilpModel, y: &[f64], tol: f64) -> bool {
    let mut g = vec![0.0; model.num_cols()];
    for (i, row) in model.rows().iter().enumerate() {
        for &(j, a) in &row.coeffs {
            g[j] += a * y[i];
        }
    }
    let ymax = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let zero = 1e-9 * ymax.max(1e-300);
    let (mut gx_lo, mut gx_hi) = (0.0, 0.0);
    for (j, c) in model.columns().iter().enumerate() {
        if g[j].abs() <= zero {
            continue;
        }
        let (a, b) = (g[j] * c.lower, g[j] * c.upper);
        gx_lo += a.min(b);
        gx_hi += a.max(b);
    }
    let (mut r_lo, mut r_hi) = (0.0, 0.0);
    for (i, row) in model.rows().iter().enumerate() {
        if y[i].abs() <= zero {
            continue;
        }
        let (lo, hi) = row.activity_bounds();
        let (a, b) = (y[i] * lo, y[i] * hi);
        r_lo += a.min(b);
        r_hi += a.max(b);
    }
    gx_hi < r_lo - tol || gx_lo > r_hi + tol
}
