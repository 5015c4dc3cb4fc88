//! Study-case pipeline: build, solve, extract, evaluate and price.

use std::time::{Duration, Instant};

use gridsched_milp::{solve_mip_with_start, MipStatus, SolverConfig};
use log::info;
use thiserror::Error;

use crate::domain::Instance;
use crate::evaluate::{cost_report, evaluate_ex_post, ContingencyResponse, CostReport, EvaluateError, ExPostOptions, Schedule};
use crate::formulation::{build_with, BuildOptions, CaseConfig, CaseMode, Formulation, FormulationError};

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub solver: SolverConfig,
    pub build: BuildOptions,
    /// Let PEVs respond in the Case 1 ex-post evaluation.
    pub ex_post_pev_reserve: bool,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error("case {case} is infeasible")]
    Infeasible { case: u8 },
    #[error("case {case}: solver stopped ({status:?}) without a feasible solution")]
    NoIncumbent { case: u8, status: MipStatus },
    #[error(transparent)]
    Evaluate(#[from] EvaluateError),
}

#[derive(Debug, Clone)]
pub struct CaseSolution {
    pub case: CaseMode,
    pub status: MipStatus,
    /// Solver objective (pre-contingency part only for Case 1).
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub nodes: u64,
    pub x: Vec<f64>,
    pub schedule: Schedule,
    /// Case 1 carries its ex-post response here.
    pub response: ContingencyResponse,
    pub costs: CostReport,
    pub runtime: Duration,
}

/// Builds and solves one case. `start` is an optional feasible point of the
/// same formulation, used as the initial incumbent.
pub fn solve_case(inst: &Instance, mode: CaseMode, options: &SolveOptions, start: Option<&[f64]>) -> Result<CaseSolution, SolveError> {
    let clock = Instant::now();
    let form = build_with(inst, CaseConfig::new(mode), options.build)?;
    info!(
        "case {}: {} columns, {} rows, {} binaries",
        mode.number(),
        form.model.num_cols(),
        form.model.num_rows(),
        form.model.binary_columns().len()
    );
    let mip = solve_mip_with_start(&form.model, &options.solver, start);
    info!(
        "case {}: status {:?}, objective {}, nodes {}",
        mode.number(),
        mip.status,
        mip.objective,
        mip.nodes
    );
    let x = match (&mip.x, mip.status) {
        (Some(x), _) => x.clone(),
        (None, MipStatus::Infeasible) => return Err(SolveError::Infeasible { case: mode.number() }),
        (None, status) => {
            return Err(SolveError::NoIncumbent {
                case: mode.number(),
                status,
            })
        }
    };
    let (schedule, response, costs) = evaluate_solution(inst, &form, &x, options)?;
    Ok(CaseSolution {
        case: mode,
        status: mip.status,
        objective: mip.objective,
        bound: mip.best_bound,
        gap: mip.gap,
        nodes: mip.nodes,
        x,
        schedule,
        response,
        costs,
        runtime: clock.elapsed(),
    })
}

fn evaluate_solution(
    inst: &Instance,
    form: &Formulation,
    x: &[f64],
    options: &SolveOptions,
) -> Result<(Schedule, ContingencyResponse, CostReport), SolveError> {
    let schedule = Schedule::extract(inst, form, x);
    if form.case.mode.has_contingencies() {
        let response = ContingencyResponse::extract(inst, form, x);
        let costs = cost_report(inst, &schedule, &response, options.build);
        return Ok((schedule, response, costs));
    }
    let ex_post = ExPostOptions {
        pev_reserve: options.ex_post_pev_reserve,
        build: options.build,
        solver: options.solver.clone(),
    };
    let (response, costs) = evaluate_ex_post(inst, &schedule, &ex_post)?;
    Ok((schedule, response, costs))
}

/// Solves all three cases. Case 3 starts from the Case 2 solution, which is
/// feasible for it, so its objective never exceeds Case 2's.
pub fn solve_all(inst: &Instance, options: &SolveOptions) -> Result<[CaseSolution; 3], SolveError> {
    let case1 = solve_case(inst, CaseMode::NoReserve, options, None)?;
    let case2 = solve_case(inst, CaseMode::GeneratorsOnly, options, None)?;
    let case3 = solve_case(inst, CaseMode::GeneratorsAndPevs, options, Some(&case2.x))?;
    Ok([case1, case2, case3])
}
