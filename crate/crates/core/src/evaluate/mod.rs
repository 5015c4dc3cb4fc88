//! Independent verification and reporting over solved schedules.

mod brute;
mod cost;
mod expost;
mod feasibility;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Instance;
use crate::formulation::{Formulation, Var};

pub use brute::{brute_force_commitment, BruteForceResult, DEFAULT_MAX_PATTERNS};
pub use cost::{cost_report, CostReport};
pub use expost::{evaluate_ex_post, ExPostOptions};
pub use feasibility::{check_feasibility, EquationViolation, FEASIBILITY_TOL};

#[derive(Debug, Error)]
pub enum EvaluateError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{patterns} commitment patterns exceed the limit of {limit}")]
    TooManyPatterns { patterns: u128, limit: u128 },
    #[error("post-contingency LP for contingency {contingency} ended with status {status}")]
    ExPostFailed { contingency: String, status: String },
    #[error(transparent)]
    Formulation(#[from] crate::formulation::FormulationError),
}

/// Pre-contingency decisions. All series are indexed `[item][t]` with
/// 0-based positions; PEV series follow [`Instance::pev_pairs`] order and
/// are zero outside the connection window.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Output of every unit, conventional first.
    pub p: Vec<Vec<f64>>,
    /// Commitment of conventional units.
    pub u: Vec<Vec<f64>>,
    /// Spillage of renewable units.
    pub spill: Vec<Vec<f64>>,
    pub startup_cost: Vec<Vec<f64>>,
    pub shutdown_cost: Vec<Vec<f64>>,
    pub flow: Vec<Vec<f64>>,
    pub angle: Vec<Vec<f64>>,
    pub unserved: Vec<Vec<f64>>,
    /// Charging energy per (group, bus) pair.
    pub charge: Vec<Vec<f64>>,
    pub discharge: Vec<Vec<f64>>,
    /// Pre-contingency state of charge.
    pub soc: Vec<Vec<f64>>,
}

/// Post-contingency recourse, indexed `[k][item][t]`, plus the scheduled
/// PEV reserve capacity `[pair][t]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContingencyResponse {
    pub delta_f: Vec<Vec<f64>>,
    pub pfr: Vec<Vec<Vec<f64>>>,
    pub unserved: Vec<Vec<Vec<f64>>>,
    pub pev_charge_mode: Vec<Vec<Vec<f64>>>,
    pub pev_discharge_mode: Vec<Vec<Vec<f64>>>,
    pub pev_response: Vec<Vec<Vec<f64>>>,
    pub charge_energy: Vec<Vec<Vec<f64>>>,
    pub discharge_energy: Vec<Vec<Vec<f64>>>,
    pub soc: Vec<Vec<Vec<f64>>>,
    pub capacity: Vec<Vec<f64>>,
}

fn grid(rows: usize, nt: usize, f: impl Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
    (0..rows).map(|i| (0..nt).map(|t| f(i, t)).collect()).collect()
}

impl Schedule {
    /// All-zero schedule shaped for `inst`.
    pub fn zeros(inst: &Instance) -> Self {
        let nt = inst.n_periods();
        let nc = inst.conventional_units.len();
        let nq = inst.pev_pairs().len();
        let z = |rows| vec![vec![0.0; nt]; rows];
        Schedule {
            p: z(inst.n_units()),
            u: z(nc),
            spill: z(inst.renewable_units.len()),
            startup_cost: z(nc),
            shutdown_cost: z(nc),
            flow: z(inst.lines.len()),
            angle: z(inst.buses.len()),
            unserved: z(inst.consumers.len()),
            charge: z(nq),
            discharge: z(nq),
            soc: z(nq),
        }
    }

    /// Reads the schedule out of a solution vector of `form`.
    pub fn extract(inst: &Instance, form: &Formulation, x: &[f64]) -> Self {
        let nt = inst.n_periods();
        let nc = inst.conventional_units.len();
        let pairs = inst.pev_pairs();
        let val = |v: Var| form.catalog.value(x, v);
        Schedule {
            p: grid(inst.n_units(), nt, |g, t| val(Var::P { g, t })),
            u: grid(nc, nt, |g, t| val(Var::U { g, t })),
            spill: grid(inst.renewable_units.len(), nt, |r, t| val(Var::Spill { g: nc + r, t })),
            startup_cost: grid(nc, nt, |g, t| val(Var::StartupCost { g, t })),
            shutdown_cost: grid(nc, nt, |g, t| val(Var::ShutdownCost { g, t })),
            flow: grid(inst.lines.len(), nt, |l, t| val(Var::Flow { l, t })),
            angle: grid(inst.buses.len(), nt, |n, t| val(Var::Angle { n, t })),
            unserved: grid(inst.consumers.len(), nt, |d, t| val(Var::Unserved { d, t })),
            charge: grid(pairs.len(), nt, |q, t| val(Var::Charge { v: pairs[q].v, n: pairs[q].n, t })),
            discharge: grid(pairs.len(), nt, |q, t| val(Var::Discharge { v: pairs[q].v, n: pairs[q].n, t })),
            soc: grid(pairs.len(), nt, |q, t| val(Var::SocPre { v: pairs[q].v, n: pairs[q].n, t })),
        }
    }

    /// Value of a pre-contingency variable, or `None` for other families.
    pub(crate) fn value_of(&self, inst: &Instance, var: Var) -> Option<f64> {
        let nc = inst.conventional_units.len();
        let pair = |v: usize, n: usize| inst.pev_pairs().iter().position(|p| p.v == v && p.n == n);
        Some(match var {
            Var::P { g, t } => self.p[g][t],
            Var::U { g, t } => self.u[g][t],
            Var::Spill { g, t } => self.spill[g - nc][t],
            Var::StartupCost { g, t } => self.startup_cost[g][t],
            Var::ShutdownCost { g, t } => self.shutdown_cost[g][t],
            Var::Flow { l, t } => self.flow[l][t],
            Var::Angle { n, t } => self.angle[n][t],
            Var::Unserved { d, t } => self.unserved[d][t],
            Var::Charge { v, n, t } => self.charge[pair(v, n)?][t],
            Var::Discharge { v, n, t } => self.discharge[pair(v, n)?][t],
            Var::SocPre { v, n, t } => self.soc[pair(v, n)?][t],
            _ => return None,
        })
    }
}

impl ContingencyResponse {
    /// Response with no contingencies and zero capacity.
    pub fn empty(inst: &Instance) -> Self {
        ContingencyResponse {
            capacity: vec![vec![0.0; inst.n_periods()]; inst.pev_pairs().len()],
            ..Default::default()
        }
    }

    /// All-zero response with every contingency of `inst`.
    pub fn zeros(inst: &Instance) -> Self {
        let nt = inst.n_periods();
        let nk = inst.contingencies.len();
        let nq = inst.pev_pairs().len();
        let cube = |rows| vec![vec![vec![0.0; nt]; rows]; nk];
        ContingencyResponse {
            delta_f: vec![vec![0.0; nt]; nk],
            pfr: cube(inst.n_units()),
            unserved: cube(inst.consumers.len()),
            pev_charge_mode: cube(nq),
            pev_discharge_mode: cube(nq),
            pev_response: cube(nq),
            charge_energy: cube(nq),
            discharge_energy: cube(nq),
            soc: cube(nq),
            capacity: vec![vec![0.0; nt]; nq],
        }
    }

    pub fn n_contingencies(&self) -> usize {
        self.delta_f.len()
    }

    /// Reads the response out of a solution vector of `form`. Cases without
    /// contingency constraints give an [`empty`](Self::empty) response.
    pub fn extract(inst: &Instance, form: &Formulation, x: &[f64]) -> Self {
        if !form.case.mode.has_contingencies() {
            return Self::empty(inst);
        }
        let nt = inst.n_periods();
        let pairs = inst.pev_pairs();
        let nk = inst.contingencies.len();
        let val = |v: Var| form.catalog.value(x, v);
        let pev = |f: fn(usize, usize, usize, usize) -> Var| -> Vec<Vec<Vec<f64>>> {
            (0..nk)
                .map(|k| grid(pairs.len(), nt, |q, t| val(f(pairs[q].v, pairs[q].n, t, k))))
                .collect()
        };
        ContingencyResponse {
            delta_f: grid(nk, nt, |k, t| val(Var::FreqDev { t, k })),
            pfr: (0..nk).map(|k| grid(inst.n_units(), nt, |g, t| val(Var::Pfr { g, t, k }))).collect(),
            unserved: (0..nk)
                .map(|k| grid(inst.consumers.len(), nt, |d, t| val(Var::UnservedPfr { d, t, k })))
                .collect(),
            pev_charge_mode: pev(|v, n, t, k| Var::PevPfrCharge { v, n, t, k }),
            pev_discharge_mode: pev(|v, n, t, k| Var::PevPfrDischarge { v, n, t, k }),
            pev_response: pev(|v, n, t, k| Var::PevPfr { v, n, t, k }),
            charge_energy: pev(|v, n, t, k| Var::ChargePfrEnergy { v, n, t, k }),
            discharge_energy: pev(|v, n, t, k| Var::DischargePfrEnergy { v, n, t, k }),
            soc: pev(|v, n, t, k| Var::Soc { v, n, t, k }),
            capacity: grid(pairs.len(), nt, |q, t| val(Var::PevCapacity { v: pairs[q].v, n: pairs[q].n, t })),
        }
    }
}
