//! Post-contingency consequences of a reserve-blind schedule.

use gridsched_milp::{solve_lp, LpStatus, MilpModel, SolverConfig};

use super::{cost_report, ContingencyResponse, CostReport, EvaluateError, Schedule};
use crate::domain::Instance;
use crate::formulation::{build_with, BuildOptions, CaseConfig, CaseMode, Formulation};
use crate::parallel;

#[derive(Debug, Clone, Default)]
pub struct ExPostOptions {
    /// Let PEV fleets respond, buying capacity at their offer. Off by
    /// default so the evaluation isolates the missing reserve planning.
    pub pev_reserve: bool,
    pub build: BuildOptions,
    /// LP settings; `threads` caps concurrent contingency solves.
    pub solver: SolverConfig,
}

/// Solves one recourse LP per contingency with every pre-contingency
/// decision pinned to `schedule`, and prices the result.
///
/// With PEV reserve enabled, each contingency buys its own capacity and the
/// reported capacity is the per-period maximum over contingencies.
pub fn evaluate_ex_post(
    inst: &Instance,
    schedule: &Schedule,
    options: &ExPostOptions,
) -> Result<(ContingencyResponse, CostReport), EvaluateError> {
    let nk = inst.contingencies.len();
    let per_k = parallel::map(nk, options.solver.threads, |k| recourse(inst, schedule, k, options));
    let mut response = ContingencyResponse::zeros(inst);
    for (k, single) in per_k.into_iter().enumerate() {
        let single = single?;
        response.delta_f[k] = single.delta_f[0].clone();
        response.pfr[k] = single.pfr[0].clone();
        response.unserved[k] = single.unserved[0].clone();
        response.pev_charge_mode[k] = single.pev_charge_mode[0].clone();
        response.pev_discharge_mode[k] = single.pev_discharge_mode[0].clone();
        response.pev_response[k] = single.pev_response[0].clone();
        response.charge_energy[k] = single.charge_energy[0].clone();
        response.discharge_energy[k] = single.discharge_energy[0].clone();
        response.soc[k] = single.soc[0].clone();
        for (row, other) in response.capacity.iter_mut().zip(&single.capacity) {
            for (c, o) in row.iter_mut().zip(other) {
                *c = c.max(*o);
            }
        }
    }
    let report = cost_report(inst, schedule, &response, options.build);
    Ok((response, report))
}

fn recourse(inst: &Instance, schedule: &Schedule, k: usize, options: &ExPostOptions) -> Result<ContingencyResponse, EvaluateError> {
    let mut sub = inst.clone();
    sub.contingencies = vec![inst.contingencies[k].clone()];
    let mode = if options.pev_reserve { CaseMode::GeneratorsAndPevs } else { CaseMode::GeneratorsOnly };
    let form = build_with(&sub, CaseConfig::new(mode), options.build)?;
    let model = pinned_recourse_model(&sub, &form, schedule);
    let lp = solve_lp(&model, &options.solver);
    if lp.status != LpStatus::Optimal {
        return Err(EvaluateError::ExPostFailed {
            contingency: inst.contingencies[k].id.clone(),
            status: format!("{:?}", lp.status),
        });
    }
    Ok(ContingencyResponse::extract(&sub, &form, &lp.x))
}

/// Copy of the model with pre-contingency columns fixed to the schedule and
/// only contingency rows kept.
fn pinned_recourse_model(inst: &Instance, form: &Formulation, schedule: &Schedule) -> MilpModel {
    let mut model = MilpModel::new();
    for (j, col) in form.model.columns().iter().enumerate() {
        let (lo, hi) = match schedule.value_of(inst, form.catalog.var(j)) {
            Some(v) => {
                let v = if col.binary { v.round() } else { v };
                let v = v.clamp(col.lower, col.upper);
                (v, v)
            }
            None => (col.lower, col.upper),
        };
        model.add_column(col.name.clone(), lo, hi, col.cost, false);
    }
    for (row, tag) in form.model.rows().iter().zip(&form.tags) {
        if tag.get("k").is_some_and(|k| k >= 1) {
            model.add_row(row.name.clone(), row.coeffs.clone(), row.sense, row.rhs);
        }
    }
    model
}
