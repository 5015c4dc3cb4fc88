//! Compiles an [`Instance`] and a study case into a [`MilpModel`], keeping a
//! catalog of every variable and a tag for every row.

mod catalog;
mod tags;

use std::collections::BTreeMap;
use std::fmt;

use gridsched_milp::{MilpModel, Sense};
use thiserror::Error;

use crate::domain::{Instance, PevPair, Violation};

pub use catalog::{Var, VariableCatalog};
pub use tags::{ConstraintTag, EqId};

/// The three study cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum CaseMode {
    /// Case 1: no contingency constraints.
    NoReserve,
    /// Case 2: only generating units provide primary response.
    GeneratorsOnly,
    /// Case 3: generating units and PEV fleets provide primary response.
    GeneratorsAndPevs,
}

impl CaseMode {
    pub fn from_number(case: u8) -> Option<Self> {
        match case {
            1 => Some(CaseMode::NoReserve),
            2 => Some(CaseMode::GeneratorsOnly),
            3 => Some(CaseMode::GeneratorsAndPevs),
            _ => None,
        }
    }

    pub fn number(&self) -> u8 {
        match self {
            CaseMode::NoReserve => 1,
            CaseMode::GeneratorsOnly => 2,
            CaseMode::GeneratorsAndPevs => 3,
        }
    }

    pub fn has_contingencies(&self) -> bool {
        *self != CaseMode::NoReserve
    }
}

impl fmt::Display for CaseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseMode::NoReserve => "NoReserve",
            CaseMode::GeneratorsOnly => "GeneratorsOnly",
            CaseMode::GeneratorsAndPevs => "GeneratorsAndPevs",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CaseConfig {
    pub mode: CaseMode,
}

impl CaseConfig {
    pub fn new(mode: CaseMode) -> Self {
        Self { mode }
    }
}

/// Switches that restore literal readings of the objective.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BuildOptions {
    /// Charge the frequency-deviation penalty once per consumer, as the
    /// objective's summation literally reads, instead of once per (t, k).
    pub per_consumer_freq_penalty: bool,
    /// Price PEV deployment as `Cp * p` (currency/MWh times MW) instead of
    /// `Cp * D^PR * p`.
    pub literal_deployment_cost: bool,
}

#[derive(Debug, Error)]
pub enum FormulationError {
    #[error("instance has {} validation errors, first: {}", .0.len(), .0[0])]
    InvalidInstance(Vec<Violation>),
    #[error("UNKNOWN_ROW: row {row} out of range (model has {rows} rows)")]
    UnknownRow { row: usize, rows: usize },
}

/// A built model with its variable catalog and row tags.
#[derive(Debug, Clone)]
pub struct Formulation {
    pub model: MilpModel,
    pub catalog: VariableCatalog,
    pub tags: Vec<ConstraintTag>,
    pub case: CaseConfig,
    pub options: BuildOptions,
}

impl Formulation {
    /// The tag of `row`.
    pub fn explain(&self, row: usize) -> Result<&ConstraintTag, FormulationError> {
        self.tags.get(row).ok_or(FormulationError::UnknownRow {
            row,
            rows: self.tags.len(),
        })
    }

    /// Row count per equation label (`"Eq5"` counts both sides).
    pub fn row_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for tag in &self.tags {
            *out.entry(tag.eq.equation()).or_insert(0) += 1;
        }
        out
    }
}

/// Builds the model for `case` with default options.
pub fn build(instance: &Instance, case: CaseConfig) -> Result<Formulation, FormulationError> {
    build_with(instance, case, BuildOptions::default())
}

pub fn build_with(instance: &Instance, case: CaseConfig, options: BuildOptions) -> Result<Formulation, FormulationError> {
    let violations = instance.validate();
    if !violations.is_empty() {
        return Err(FormulationError::InvalidInstance(violations));
    }
    let mut b = Builder::new(instance, case.mode, options);
    b.add_columns();
    b.add_energy_balance();
    b.add_network();
    b.add_unit_limits();
    b.add_ramps();
    b.add_commitment_logic();
    b.add_pev_storage();
    if case.mode.has_contingencies() {
        b.add_generator_pfr();
        b.add_pfr_balance();
        b.add_pev_pfr();
    }
    b.build_objective();
    Ok(Formulation {
        model: b.model,
        catalog: b.catalog,
        tags: b.tags,
        case,
        options,
    })
}

type Index = Vec<(&'static str, usize)>;

struct Builder<'a> {
    inst: &'a Instance,
    mode: CaseMode,
    options: BuildOptions,
    model: MilpModel,
    catalog: VariableCatalog,
    tags: Vec<ConstraintTag>,
    nt: usize,
    nc: usize,
    dt: f64,
    unit_bus: Vec<usize>,
    consumer_bus: Vec<usize>,
    line_ends: Vec<(usize, usize)>,
    pairs: Vec<PevPair>,
    outaged: Vec<Vec<bool>>,
}

impl<'a> Builder<'a> {
    fn new(inst: &'a Instance, mode: CaseMode, options: BuildOptions) -> Self {
        let bus = inst.bus_index();
        let ng = inst.n_units();
        let nk = if mode.has_contingencies() { inst.contingencies.len() } else { 0 };
        Builder {
            inst,
            mode,
            options,
            model: MilpModel::new(),
            catalog: VariableCatalog::default(),
            tags: Vec::new(),
            nt: inst.n_periods(),
            nc: inst.conventional_units.len(),
            dt: inst.system.period_length,
            unit_bus: (0..ng).map(|g| bus[inst.unit_bus(g)]).collect(),
            consumer_bus: inst.consumers.iter().map(|d| bus[d.bus.as_str()]).collect(),
            line_ends: inst.lines.iter().map(|l| (bus[l.from_bus.as_str()], bus[l.to_bus.as_str()])).collect(),
            pairs: inst.pev_pairs(),
            outaged: (0..nk).map(|k| inst.outaged(k)).collect(),
        }
    }

    fn nk(&self) -> usize {
        self.outaged.len()
    }

    fn var(&mut self, var: Var, lower: f64, upper: f64, binary: bool) -> usize {
        let col = self.catalog.insert(var);
        let added = self.model.add_column(var.to_string(), lower, upper, 0.0, binary);
        debug_assert_eq!(col, added);
        col
    }

    fn col(&self, var: Var) -> usize {
        self.catalog.col(var).unwrap_or_else(|| panic!("missing variable {var}"))
    }

    /// Adds a row after merging repeated columns and dropping zeros.
    fn row(&mut self, eq: EqId, index: Index, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (c, a) in terms {
            *merged.entry(c).or_insert(0.0) += a;
        }
        let coeffs: Vec<(usize, f64)> = merged.into_iter().filter(|&(_, a)| a != 0.0).collect();
        let tag = ConstraintTag { eq, index };
        self.model.add_row(tag.row_name(), coeffs, sense, rhs);
        self.tags.push(tag);
    }

    fn pev_window(&self, q: usize) -> std::ops::Range<usize> {
        let group = &self.inst.pev_groups[self.pairs[q].v];
        group.window_start - 1..group.window_end
    }

    fn add_columns(&mut self) {
        let inst = self.inst;
        let nt = self.nt;
        for (g, unit) in inst.conventional_units.iter().enumerate() {
            for t in 0..nt {
                self.var(Var::P { g, t }, 0.0, unit.p_max, false);
            }
        }
        for (r, unit) in inst.renewable_units.iter().enumerate() {
            let _ = unit;
            for t in 0..nt {
                self.var(Var::P { g: self.nc + r, t }, 0.0, f64::INFINITY, false);
            }
        }
        for (g, unit) in inst.conventional_units.iter().enumerate() {
            // Initial must-run and must-stop periods are bound fixings.
            let must_run = unit.init_must_run.min(nt);
            let must_stop = unit.init_must_stop.min(nt);
            for t in 0..nt {
                let (lo, hi) = if t < must_run {
                    (1.0, 1.0)
                } else if t < must_stop {
                    (0.0, 0.0)
                } else {
                    (0.0, 1.0)
                };
                self.var(Var::U { g, t }, lo, hi, true);
            }
        }
        for r in 0..inst.renewable_units.len() {
            for t in 0..nt {
                self.var(Var::Spill { g: self.nc + r, t }, 0.0, f64::INFINITY, false);
            }
        }
        for g in 0..self.nc {
            for t in 0..nt {
                self.var(Var::StartupCost { g, t }, 0.0, f64::INFINITY, false);
            }
        }
        for g in 0..self.nc {
            for t in 0..nt {
                self.var(Var::ShutdownCost { g, t }, 0.0, f64::INFINITY, false);
            }
        }
        for (l, line) in inst.lines.iter().enumerate() {
            for t in 0..nt {
                let cap = line.capacity[t];
                self.var(Var::Flow { l, t }, -cap, cap, false);
            }
        }
        for (n, bus) in inst.buses.iter().enumerate() {
            for t in 0..nt {
                let (lo, hi) = if bus.is_slack { (0.0, 0.0) } else { (f64::NEG_INFINITY, f64::INFINITY) };
                self.var(Var::Angle { n, t }, lo, hi, false);
            }
        }
        for (d, consumer) in inst.consumers.iter().enumerate() {
            for t in 0..nt {
                self.var(Var::Unserved { d, t }, 0.0, consumer.demand[t], false);
            }
        }
        // PEV schedule and pre-contingency state of charge; nothing exists
        // outside the connection window.
        for q in 0..self.pairs.len() {
            let PevPair { v, n, count } = self.pairs[q];
            let group = &inst.pev_groups[v];
            let nv = f64::from(count);
            let rate = nv * group.p_max * self.dt;
            for t in self.pev_window(q) {
                self.var(Var::Charge { v, n, t }, 0.0, rate, false);
            }
            for t in self.pev_window(q) {
                self.var(Var::Discharge { v, n, t }, 0.0, rate, false);
            }
            for t in self.pev_window(q) {
                let (lo, hi) = self.soc_bounds(q, t);
                self.var(Var::SocPre { v, n, t }, lo, hi, false);
            }
        }
        if !self.mode.has_contingencies() {
            return;
        }
        let pev_reserve = self.mode == CaseMode::GeneratorsAndPevs;
        for q in 0..self.pairs.len() {
            let PevPair { v, n, .. } = self.pairs[q];
            for t in self.pev_window(q) {
                let hi = if pev_reserve { f64::INFINITY } else { 0.0 };
                self.var(Var::PevCapacity { v, n, t }, 0.0, hi, false);
            }
        }
        let df_max = inst.system.delta_f_max;
        for k in 0..self.nk() {
            for t in 0..nt {
                self.var(Var::FreqDev { t, k }, -df_max, 0.0, false);
            }
            for g in 0..inst.n_units() {
                let (lo, hi) = if self.outaged[k][g] {
                    (f64::NEG_INFINITY, f64::INFINITY)
                } else if g < self.nc {
                    (0.0, f64::INFINITY)
                } else {
                    // Surviving renewables give no primary response.
                    (0.0, 0.0)
                };
                for t in 0..nt {
                    self.var(Var::Pfr { g, t, k }, lo, hi, false);
                }
            }
            for d in 0..inst.consumers.len() {
                for t in 0..nt {
                    self.var(Var::UnservedPfr { d, t, k }, 0.0, f64::INFINITY, false);
                }
            }
            for q in 0..self.pairs.len() {
                let PevPair { v, n, count } = self.pairs[q];
                let cap = f64::from(count) * inst.pev_groups[v].p_max;
                for t in self.pev_window(q) {
                    let (lo, hi) = self.soc_bounds(q, t);
                    self.var(Var::Soc { v, n, t, k }, lo, hi, false);
                    self.var(Var::ChargePfrEnergy { v, n, t, k }, 0.0, f64::INFINITY, false);
                    self.var(Var::DischargePfrEnergy { v, n, t, k }, 0.0, f64::INFINITY, false);
                    self.var(Var::PevPfrCharge { v, n, t, k }, 0.0, cap, false);
                    self.var(Var::PevPfrDischarge { v, n, t, k }, 0.0, cap, false);
                    self.var(Var::PevPfr { v, n, t, k }, 0.0, f64::INFINITY, false);
                }
            }
        }
    }

    /// SOC limits, with the end-of-window target folded into the last
    /// period's lower bound.
    fn soc_bounds(&self, q: usize, t: usize) -> (f64, f64) {
        let PevPair { v, count, .. } = self.pairs[q];
        let group = &self.inst.pev_groups[v];
        let nv = f64::from(count);
        let mut lo = nv * group.e_min;
        if t + 1 == group.window_end {
            lo = lo.max(nv * group.e_final);
        }
        (lo, nv * group.e_max)
    }

    fn add_energy_balance(&mut self) {
        let inst = self.inst;
        for t in 0..self.nt {
            for n in 0..inst.buses.len() {
                let mut terms = Vec::new();
                for g in 0..inst.n_units() {
                    if self.unit_bus[g] == n {
                        terms.push((self.col(Var::P { g, t }), 1.0));
                    }
                }
                for (l, &(from, to)) in self.line_ends.iter().enumerate() {
                    if to == n {
                        terms.push((self.col(Var::Flow { l, t }), 1.0));
                    }
                    if from == n {
                        terms.push((self.col(Var::Flow { l, t }), -1.0));
                    }
                }
                for (q, pair) in self.pairs.iter().enumerate() {
                    if pair.n == n && self.pev_window(q).contains(&t) {
                        let (v, n) = (pair.v, pair.n);
                        terms.push((self.col(Var::Discharge { v, n, t }), 1.0 / self.dt));
                        terms.push((self.col(Var::Charge { v, n, t }), -1.0 / self.dt));
                    }
                }
                let mut demand = 0.0;
                for (d, consumer) in inst.consumers.iter().enumerate() {
                    if self.consumer_bus[d] == n {
                        demand += consumer.demand[t];
                        terms.push((self.col(Var::Unserved { d, t }), 1.0));
                    }
                }
                self.row(EqId::Eq2, vec![("n", n + 1), ("t", t + 1)], terms, Sense::Eq, demand);
            }
        }
    }

    fn add_network(&mut self) {
        for t in 0..self.nt {
            for (l, line) in self.inst.lines.iter().enumerate() {
                let (from, to) = self.line_ends[l];
                let b = 1.0 / line.reactance;
                let terms = vec![
                    (self.col(Var::Flow { l, t }), 1.0),
                    (self.col(Var::Angle { n: from, t }), -b),
                    (self.col(Var::Angle { n: to, t }), b),
                ];
                self.row(EqId::Eq4, vec![("l", l + 1), ("t", t + 1)], terms, Sense::Eq, 0.0);
            }
        }
    }

    fn add_unit_limits(&mut self) {
        let inst = self.inst;
        for (g, unit) in inst.conventional_units.iter().enumerate() {
            for t in 0..self.nt {
                let p = self.col(Var::P { g, t });
                let u = self.col(Var::U { g, t });
                let idx = vec![("g", g + 1), ("t", t + 1)];
                self.row(EqId::Eq5Min, idx.clone(), vec![(p, 1.0), (u, -unit.p_min)], Sense::Ge, 0.0);
                self.row(EqId::Eq5Max, idx, vec![(p, 1.0), (u, -unit.p_max)], Sense::Le, 0.0);
            }
        }
        for (r, unit) in inst.renewable_units.iter().enumerate() {
            let g = self.nc + r;
            for t in 0..self.nt {
                let terms = vec![(self.col(Var::P { g, t }), 1.0), (self.col(Var::Spill { g, t }), 1.0)];
                let avail = unit.p_max * unit.availability[t];
                self.row(EqId::Eq6, vec![("g", g + 1), ("t", t + 1)], terms, Sense::Eq, avail);
            }
        }
    }

    fn add_ramps(&mut self) {
        for (g, unit) in self.inst.conventional_units.iter().enumerate() {
            for t in 0..self.nt {
                let p = self.col(Var::P { g, t });
                let idx = vec![("g", g + 1), ("t", t + 1)];
                if t == 0 {
                    self.row(EqId::Eq7, idx.clone(), vec![(p, 1.0)], Sense::Le, unit.ramp_up + unit.p0);
                    self.row(EqId::Eq8, idx, vec![(p, -1.0)], Sense::Le, unit.ramp_down - unit.p0);
                } else {
                    let prev = self.col(Var::P { g, t: t - 1 });
                    self.row(EqId::Eq7, idx.clone(), vec![(p, 1.0), (prev, -1.0)], Sense::Le, unit.ramp_up);
                    self.row(EqId::Eq8, idx, vec![(prev, 1.0), (p, -1.0)], Sense::Le, unit.ramp_down);
                }
            }
        }
    }

    /// `u_{g,t-1}` as a column, or the initial state as a constant.
    fn prev_u(&self, g: usize, t: usize) -> Result<usize, f64> {
        if t == 0 {
            Err(if self.inst.conventional_units[g].u0 { 1.0 } else { 0.0 })
        } else {
            Ok(self.col(Var::U { g, t: t - 1 }))
        }
    }

    /// Appends `coef * u_{g,t-1}`, moving the initial state to `rhs`.
    fn push_prev_u(&self, terms: &mut Vec<(usize, f64)>, rhs: &mut f64, g: usize, t: usize, coef: f64) {
        match self.prev_u(g, t) {
            Ok(c) => terms.push((c, coef)),
            Err(u0) => *rhs -= coef * u0,
        }
    }

    fn add_commitment_logic(&mut self) {
        let nt = self.nt;
        for (g, unit) in self.inst.conventional_units.iter().enumerate() {
            for t in 0..nt {
                let u = self.col(Var::U { g, t });
                let idx = vec![("g", g + 1), ("t", t + 1)];
                // c^SU >= SU (u_t - u_{t-1})
                let mut terms = vec![(self.col(Var::StartupCost { g, t }), 1.0), (u, -unit.su_cost)];
                let mut rhs = 0.0;
                self.push_prev_u(&mut terms, &mut rhs, g, t, unit.su_cost);
                self.row(EqId::Eq9, idx.clone(), terms, Sense::Ge, rhs);
                // c^SD >= SD (u_{t-1} - u_t)
                let mut terms = vec![(self.col(Var::ShutdownCost { g, t }), 1.0), (u, unit.sd_cost)];
                let mut rhs = 0.0;
                self.push_prev_u(&mut terms, &mut rhs, g, t, -unit.sd_cost);
                self.row(EqId::Eq10, idx, terms, Sense::Ge, rhs);
            }

            let ut = unit.min_up;
            let dt = unit.min_down;
            let must_run = unit.init_must_run.min(nt);
            let must_stop = unit.init_must_stop.min(nt);
            if ut >= 2 {
                // Rolling window: sum_{tau=t}^{t+UT-1} u >= UT (u_t - u_{t-1}).
                for t in must_run..(nt + 1).saturating_sub(ut) {
                    let ut_f = ut as f64;
                    let mut terms: Vec<(usize, f64)> = (t..t + ut).map(|tau| (self.col(Var::U { g, t: tau }), 1.0)).collect();
                    terms.push((self.col(Var::U { g, t }), -ut_f));
                    let mut rhs = 0.0;
                    self.push_prev_u(&mut terms, &mut rhs, g, t, ut_f);
                    self.row(EqId::Eq13, vec![("g", g + 1), ("t", t + 1)], terms, Sense::Ge, rhs);
                }
                // Horizon tail: sum_{tau=t}^{T} [u_tau - (u_t - u_{t-1})] >= 0.
                for t in (nt + 1).saturating_sub(ut)..nt {
                    let len = (nt - t) as f64;
                    let mut terms: Vec<(usize, f64)> = (t..nt).map(|tau| (self.col(Var::U { g, t: tau }), 1.0)).collect();
                    terms.push((self.col(Var::U { g, t }), -len));
                    let mut rhs = 0.0;
                    self.push_prev_u(&mut terms, &mut rhs, g, t, len);
                    self.row(EqId::Eq14, vec![("g", g + 1), ("t", t + 1)], terms, Sense::Ge, rhs);
                }
            }
            if dt >= 2 {
                // sum_{tau=t}^{t+DT-1} (1 - u) >= DT (u_{t-1} - u_t).
                for t in must_stop..(nt + 1).saturating_sub(dt) {
                    let dt_f = dt as f64;
                    let mut terms: Vec<(usize, f64)> = (t..t + dt).map(|tau| (self.col(Var::U { g, t: tau }), -1.0)).collect();
                    terms.push((self.col(Var::U { g, t }), dt_f));
                    let mut rhs = -dt_f;
                    self.push_prev_u(&mut terms, &mut rhs, g, t, -dt_f);
                    self.row(EqId::Eq16, vec![("g", g + 1), ("t", t + 1)], terms, Sense::Ge, rhs);
                }
                // sum_{tau=t}^{T} [1 - u_tau - (u_{t-1} - u_t)] >= 0.
                for t in (nt + 1).saturating_sub(dt)..nt {
                    let len = (nt - t) as f64;
                    let mut terms: Vec<(usize, f64)> = (t..nt).map(|tau| (self.col(Var::U { g, t: tau }), -1.0)).collect();
                    terms.push((self.col(Var::U { g, t }), len));
                    let mut rhs = -len;
                    self.push_prev_u(&mut terms, &mut rhs, g, t, -len);
                    self.row(EqId::Eq17, vec![("g", g + 1), ("t", t + 1)], terms, Sense::Ge, rhs);
                }
            }
        }
    }

    /// SOC recursion for the pre-contingency trajectory and, in reserve
    /// cases, for every contingency.
    fn add_pev_storage(&mut self) {
        let scenarios: Vec<Option<usize>> = std::iter::once(None).chain((0..self.nk()).map(Some)).collect();
        for q in 0..self.pairs.len() {
            let PevPair { v, n, count } = self.pairs[q];
            let group = &self.inst.pev_groups[v];
            let eta = group.efficiency;
            let window = self.pev_window(q);
            for &k in &scenarios {
                for t in window.clone() {
                    let soc = |t| match k {
                        None => Var::SocPre { v, n, t },
                        Some(k) => Var::Soc { v, n, t, k },
                    };
                    let mut terms = vec![
                        (self.col(soc(t)), 1.0),
                        (self.col(Var::Charge { v, n, t }), -eta),
                        (self.col(Var::Discharge { v, n, t }), 1.0 / eta),
                    ];
                    if let Some(k) = k {
                        terms.push((self.col(Var::ChargePfrEnergy { v, n, t, k }), eta));
                        terms.push((self.col(Var::DischargePfrEnergy { v, n, t, k }), 1.0 / eta));
                    }
                    let rhs = if t == window.start {
                        // Boundary condition: SOC before the window is the
                        // initial fleet energy.
                        f64::from(count) * group.e_initial
                    } else {
                        terms.push((self.col(soc(t - 1)), -1.0));
                        0.0
                    };
                    let idx = vec![("v", v + 1), ("n", n + 1), ("t", t + 1), ("k", k.map_or(0, |k| k + 1))];
                    self.row(EqId::Eq25, idx, terms, Sense::Eq, rhs);
                }
            }
        }
    }

    fn add_generator_pfr(&mut self) {
        let inst = self.inst;
        for k in 0..self.nk() {
            for t in 0..self.nt {
                let df = self.col(Var::FreqDev { t, k });
                for g in 0..inst.n_units() {
                    let pfr = self.col(Var::Pfr { g, t, k });
                    let p = self.col(Var::P { g, t });
                    let idx = vec![("g", g + 1), ("t", t + 1), ("k", k + 1)];
                    if self.outaged[k][g] {
                        self.row(EqId::Eq21, idx, vec![(pfr, 1.0), (p, 1.0)], Sense::Eq, 0.0);
                    } else if g < self.nc {
                        let unit = &inst.conventional_units[g];
                        let u = self.col(Var::U { g, t });
                        self.row(EqId::Eq18, idx.clone(), vec![(pfr, 1.0), (df, 1.0 / unit.droop)], Sense::Le, 0.0);
                        self.row(EqId::Eq19, idx, vec![(pfr, 1.0), (p, 1.0), (u, -unit.p_max)], Sense::Le, 0.0);
                    }
                }
            }
        }
    }

    fn add_pfr_balance(&mut self) {
        let inst = self.inst;
        for k in 0..self.nk() {
            for t in 0..self.nt {
                let mut terms: Vec<(usize, f64)> = Vec::new();
                for d in 0..inst.consumers.len() {
                    terms.push((self.col(Var::UnservedPfr { d, t, k }), 1.0));
                }
                for g in 0..inst.n_units() {
                    terms.push((self.col(Var::Pfr { g, t, k }), 1.0));
                }
                for (q, pair) in self.pairs.iter().enumerate() {
                    if self.pev_window(q).contains(&t) {
                        terms.push((self.col(Var::PevPfr { v: pair.v, n: pair.n, t, k }), 1.0));
                    }
                }
                self.row(EqId::Eq22, vec![("t", t + 1), ("k", k + 1)], terms, Sense::Eq, 0.0);
            }
            for (d, consumer) in inst.consumers.iter().enumerate() {
                for t in 0..self.nt {
                    let terms = vec![
                        (self.col(Var::Unserved { d, t }), 1.0),
                        (self.col(Var::UnservedPfr { d, t, k }), 1.0),
                    ];
                    let idx = vec![("d", d + 1), ("t", t + 1), ("k", k + 1)];
                    self.row(EqId::Eq22Unserved, idx, terms, Sense::Le, consumer.demand[t]);
                }
            }
        }
    }

    fn add_pev_pfr(&mut self) {
        let d_pr = self.inst.system.d_pr;
        for k in 0..self.nk() {
            for q in 0..self.pairs.len() {
                let PevPair { v, n, count } = self.pairs[q];
                let group = &self.inst.pev_groups[v];
                let rate = f64::from(count) * group.p_max * self.dt;
                let droop = group.droop;
                for t in self.pev_window(q) {
                    let idx = vec![("v", v + 1), ("n", n + 1), ("t", t + 1), ("k", k + 1)];
                    let ecpr = self.col(Var::ChargePfrEnergy { v, n, t, k });
                    let edpr = self.col(Var::DischargePfrEnergy { v, n, t, k });
                    let prc = self.col(Var::PevPfrCharge { v, n, t, k });
                    let prd = self.col(Var::PevPfrDischarge { v, n, t, k });
                    let pr = self.col(Var::PevPfr { v, n, t, k });
                    let ec = self.col(Var::Charge { v, n, t });
                    let ed = self.col(Var::Discharge { v, n, t });
                    let cap = self.col(Var::PevCapacity { v, n, t });
                    let df = self.col(Var::FreqDev { t, k });
                    self.row(EqId::Eq28, idx.clone(), vec![(ecpr, 1.0), (prc, -d_pr)], Sense::Eq, 0.0);
                    self.row(EqId::Eq29, idx.clone(), vec![(prc, d_pr), (ec, -1.0)], Sense::Le, 0.0);
                    self.row(EqId::Eq30, idx.clone(), vec![(edpr, 1.0), (prd, -d_pr)], Sense::Eq, 0.0);
                    self.row(EqId::Eq31, idx.clone(), vec![(ed, 1.0), (prd, d_pr)], Sense::Le, rate);
                    self.row(EqId::Eq34, idx.clone(), vec![(pr, 1.0), (prc, -1.0), (prd, -1.0)], Sense::Eq, 0.0);
                    self.row(EqId::Eq35, idx.clone(), vec![(pr, 1.0), (df, 1.0 / droop)], Sense::Le, 0.0);
                    self.row(EqId::Eq37, idx, vec![(pr, 1.0), (cap, -1.0)], Sense::Le, 0.0);
                }
            }
        }
    }

    fn build_objective(&mut self) {
        let inst = self.inst;
        let s = &inst.system;
        let freq_weight = if self.options.per_consumer_freq_penalty { inst.consumers.len() as f64 } else { 1.0 };
        for col in 0..self.catalog.len() {
            let cost = match self.catalog.var(col) {
                Var::P { g, .. } => {
                    let c = if g < self.nc {
                        inst.conventional_units[g].cost
                    } else {
                        inst.renewable_units[g - self.nc].cost
                    };
                    c * self.dt
                }
                Var::StartupCost { .. } | Var::ShutdownCost { .. } => 1.0,
                Var::Unserved { .. } | Var::UnservedPfr { .. } => s.c_unserved * self.dt,
                Var::Spill { .. } => s.c_spill * self.dt,
                Var::FreqDev { .. } => -s.c_freq * freq_weight,
                Var::PevCapacity { v, t, .. } => inst.pev_groups[v].capacity_offer_at(t),
                Var::PevPfr { v, t, .. } => {
                    let cp = inst.pev_groups[v].deployment_offer_at(t);
                    if self.options.literal_deployment_cost {
                        cp
                    } else {
                        cp * s.d_pr
                    }
                }
                _ => 0.0,
            };
            if cost != 0.0 {
                self.model.set_cost(col, cost);
            }
        }
    }
}
