//! Feasibility oracle. Every equation is recomputed from the instance and
//! the extracted values; model rows are never consulted.

use std::fmt;

use serde::Serialize;

use super::{ContingencyResponse, EvaluateError, Schedule};
use crate::domain::Instance;
use crate::formulation::CaseMode;

/// Largest admissible residual after dividing by the equation's largest
/// coefficient magnitude.
pub const FEASIBILITY_TOL: f64 = 1e-6;

const INT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquationViolation {
    /// Equation label, e.g. `"Eq26"`, or `"Integrality"`.
    pub equation: &'static str,
    /// 1-based indices; for SOC equations `k = 0` is the pre-contingency path.
    pub index: Vec<(&'static str, usize)>,
    /// Scaled amount by which the equation is violated.
    pub residual: f64,
}

impl fmt::Display for EquationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.equation)?;
        for (k, v) in &self.index {
            write!(f, " {k}={v}")?;
        }
        write!(f, ": residual {:e}", self.residual)
    }
}

type Idx = Vec<(&'static str, usize)>;

struct Oracle {
    out: Vec<EquationViolation>,
}

impl Oracle {
    fn report(&mut self, equation: &'static str, index: Idx, excess: f64, scale: f64) {
        let residual = excess / scale.max(f64::MIN_POSITIVE);
        if residual > FEASIBILITY_TOL || residual.is_nan() {
            self.out.push(EquationViolation { equation, index, residual });
        }
    }

    fn le(&mut self, equation: &'static str, index: Idx, lhs: f64, rhs: f64, scale: f64) {
        self.report(equation, index, lhs - rhs, scale);
    }

    fn ge(&mut self, equation: &'static str, index: Idx, lhs: f64, rhs: f64, scale: f64) {
        self.report(equation, index, rhs - lhs, scale);
    }

    fn eq(&mut self, equation: &'static str, index: Idx, lhs: f64, rhs: f64, scale: f64) {
        self.report(equation, index, (lhs - rhs).abs(), scale);
    }

    fn within(&mut self, equation: &'static str, index: Idx, value: f64, lo: f64, hi: f64) {
        self.report(equation, index, (lo - value).max(value - hi).max(0.0), 1.0);
    }
}

fn shape(name: &str, m: &[Vec<f64>], rows: usize, nt: usize) -> Result<(), EvaluateError> {
    if m.len() != rows || m.iter().any(|r| r.len() != nt) {
        return Err(EvaluateError::Dimension(format!(
            "{name}: expected {rows} x {nt}, found {} rows",
            m.len()
        )));
    }
    Ok(())
}

fn check_dimensions(inst: &Instance, mode: CaseMode, s: &Schedule, r: &ContingencyResponse) -> Result<(), EvaluateError> {
    let nt = inst.n_periods();
    let nc = inst.conventional_units.len();
    let nq = inst.pev_pairs().len();
    shape("p", &s.p, inst.n_units(), nt)?;
    shape("u", &s.u, nc, nt)?;
    shape("spill", &s.spill, inst.renewable_units.len(), nt)?;
    shape("startup_cost", &s.startup_cost, nc, nt)?;
    shape("shutdown_cost", &s.shutdown_cost, nc, nt)?;
    shape("flow", &s.flow, inst.lines.len(), nt)?;
    shape("angle", &s.angle, inst.buses.len(), nt)?;
    shape("unserved", &s.unserved, inst.consumers.len(), nt)?;
    shape("charge", &s.charge, nq, nt)?;
    shape("discharge", &s.discharge, nq, nt)?;
    shape("soc", &s.soc, nq, nt)?;
    if !mode.has_contingencies() {
        return Ok(());
    }
    let nk = inst.contingencies.len();
    shape("delta_f", &r.delta_f, nk, nt)?;
    shape("capacity", &r.capacity, nq, nt)?;
    let cubes: [(&str, &Vec<Vec<Vec<f64>>>, usize); 8] = [
        ("pfr", &r.pfr, inst.n_units()),
        ("unserved_pfr", &r.unserved, inst.consumers.len()),
        ("pev_charge_mode", &r.pev_charge_mode, nq),
        ("pev_discharge_mode", &r.pev_discharge_mode, nq),
        ("pev_response", &r.pev_response, nq),
        ("charge_energy", &r.charge_energy, nq),
        ("discharge_energy", &r.discharge_energy, nq),
        ("soc_k", &r.soc, nq),
    ];
    for (name, cube, rows) in cubes {
        if cube.len() != nk {
            return Err(EvaluateError::Dimension(format!("{name}: expected {nk} contingencies, found {}", cube.len())));
        }
        for m in cube {
            shape(name, m, rows, nt)?;
        }
    }
    Ok(())
}

/// Checks every equation of `mode` against the given values. Returns an
/// empty list iff all hold within [`FEASIBILITY_TOL`]. For
/// [`CaseMode::NoReserve`] the response is ignored.
pub fn check_feasibility(
    inst: &Instance,
    mode: CaseMode,
    s: &Schedule,
    r: &ContingencyResponse,
) -> Result<Vec<EquationViolation>, EvaluateError> {
    check_dimensions(inst, mode, s, r)?;
    let mut o = Oracle { out: Vec::new() };
    check_pre(inst, s, &mut o);
    if mode.has_contingencies() {
        check_post(inst, mode, s, r, &mut o);
    }
    Ok(o.out)
}

fn check_pre(inst: &Instance, s: &Schedule, o: &mut Oracle) {
    let nt = inst.n_periods();
    let nc = inst.conventional_units.len();
    let dt = inst.system.period_length;
    let pairs = inst.pev_pairs();

    // Bus balance.
    for t in 0..nt {
        for (n, bus) in inst.buses.iter().enumerate() {
            let mut lhs = 0.0;
            let mut demand = 0.0;
            let mut scale = 1.0f64;
            for g in 0..inst.n_units() {
                if inst.unit_bus(g) == bus.id {
                    lhs += s.p[g][t];
                }
            }
            for (l, line) in inst.lines.iter().enumerate() {
                if line.to_bus == bus.id {
                    lhs += s.flow[l][t];
                }
                if line.from_bus == bus.id {
                    lhs -= s.flow[l][t];
                }
            }
            for (q, pair) in pairs.iter().enumerate() {
                if pair.n == n {
                    lhs += (s.discharge[q][t] - s.charge[q][t]) / dt;
                    scale = scale.max(1.0 / dt);
                }
            }
            for (d, c) in inst.consumers.iter().enumerate() {
                if c.bus == bus.id {
                    demand += c.demand[t];
                    lhs += s.unserved[d][t];
                }
            }
            o.eq("Eq2", vec![("n", n + 1), ("t", t + 1)], lhs, demand, scale);
        }
        for (d, c) in inst.consumers.iter().enumerate() {
            o.within("Eq2", vec![("d", d + 1), ("t", t + 1)], s.unserved[d][t], 0.0, c.demand[t]);
        }
    }

    // DC network.
    for (l, line) in inst.lines.iter().enumerate() {
        let from = inst.buses.iter().position(|b| b.id == line.from_bus).unwrap();
        let to = inst.buses.iter().position(|b| b.id == line.to_bus).unwrap();
        for t in 0..nt {
            let idx = vec![("l", l + 1), ("t", t + 1)];
            o.within("Eq3", idx.clone(), s.flow[l][t], -line.capacity[t], line.capacity[t]);
            let flow = (s.angle[from][t] - s.angle[to][t]) / line.reactance;
            o.eq("Eq4", idx, s.flow[l][t], flow, (1.0f64).max(1.0 / line.reactance));
        }
    }
    for (n, bus) in inst.buses.iter().enumerate() {
        if bus.is_slack {
            for t in 0..nt {
                o.eq("Eq4", vec![("n", n + 1), ("t", t + 1)], s.angle[n][t], 0.0, 1.0);
            }
        }
    }

    for (g, unit) in inst.conventional_units.iter().enumerate() {
        for t in 0..nt {
            let idx = vec![("g", g + 1), ("t", t + 1)];
            let (p, u) = (s.p[g][t], s.u[g][t]);
            let frac = (u - u.round()).abs();
            if frac > INT_TOL || !(-INT_TOL..=1.0 + INT_TOL).contains(&u) {
                o.out.push(EquationViolation {
                    equation: "Integrality",
                    index: idx.clone(),
                    residual: frac.max(-u).max(u - 1.0),
                });
            }
            let scale = (1.0f64).max(unit.p_max);
            o.ge("Eq5", idx.clone(), p, unit.p_min * u, scale);
            o.le("Eq5", idx.clone(), p, unit.p_max * u, scale);

            let (p_prev, u_prev) = if t == 0 {
                (unit.p0, if unit.u0 { 1.0 } else { 0.0 })
            } else {
                (s.p[g][t - 1], s.u[g][t - 1])
            };
            o.le("Eq7", idx.clone(), p - p_prev, unit.ramp_up, 1.0);
            o.le("Eq8", idx.clone(), p_prev - p, unit.ramp_down, 1.0);

            let su_scale = (1.0f64).max(unit.su_cost);
            let sd_scale = (1.0f64).max(unit.sd_cost);
            o.ge("Eq9", idx.clone(), s.startup_cost[g][t], unit.su_cost * (u - u_prev), su_scale);
            o.ge("Eq10", idx.clone(), s.shutdown_cost[g][t], unit.sd_cost * (u_prev - u), sd_scale);
            o.ge("Eq11", idx.clone(), s.startup_cost[g][t], 0.0, 1.0);
            o.ge("Eq11", idx.clone(), s.shutdown_cost[g][t], 0.0, 1.0);
            if t < unit.init_must_run {
                o.eq("Eq12", idx.clone(), u, 1.0, 1.0);
            }
            if t < unit.init_must_stop {
                o.eq("Eq15", idx, u, 0.0, 1.0);
            }
        }
        check_min_times(unit.min_up, unit.init_must_run, nt, &s.u[g], unit.u0, g, false, o);
        check_min_times(unit.min_down, unit.init_must_stop, nt, &s.u[g], unit.u0, g, true, o);
    }

    for (r, unit) in inst.renewable_units.iter().enumerate() {
        let g = nc + r;
        for t in 0..nt {
            let idx = vec![("g", g + 1), ("t", t + 1)];
            o.eq("Eq6", idx.clone(), s.p[g][t] + s.spill[r][t], unit.p_max * unit.availability[t], 1.0);
            o.ge("Eq6", idx.clone(), s.p[g][t], 0.0, 1.0);
            o.ge("Eq6", idx, s.spill[r][t], 0.0, 1.0);
        }
    }

    for (q, pair) in pairs.iter().enumerate() {
        let group = &inst.pev_groups[pair.v];
        let nv = f64::from(pair.count);
        let rate = nv * group.p_max * dt;
        for t in 0..nt {
            let idx = vec![("v", pair.v + 1), ("n", pair.n + 1), ("t", t + 1)];
            if group.connected(t) {
                o.within("Eq27", idx.clone(), s.charge[q][t], 0.0, rate);
                o.within("Eq27", idx, s.discharge[q][t], 0.0, rate);
            } else {
                for value in [s.charge[q][t], s.discharge[q][t], s.soc[q][t]] {
                    o.eq("Eq36", idx.clone(), value, 0.0, 1.0);
                }
            }
        }
        let zero = vec![0.0; nt];
        check_soc(inst, q, 0, s, &s.soc[q], &zero, &zero, o);
    }
}

/// Min-up (`down = false`) or min-down rows for one unit: the rolling
/// window after the initial fixed periods and the horizon tail.
#[allow(clippy::too_many_arguments)]
fn check_min_times(len: usize, initial: usize, nt: usize, u: &[f64], u0: bool, g: usize, down: bool, o: &mut Oracle) {
    if len < 2 {
        return;
    }
    let (window_eq, tail_eq) = if down { ("Eq16", "Eq17") } else { ("Eq13", "Eq14") };
    // Work in terms of "on" for up-time and "off" for down-time.
    let state = |t: usize| if down { 1.0 - u[t] } else { u[t] };
    let prev = |t: usize| {
        let before = if t == 0 { if u0 { 1.0 } else { 0.0 } } else { u[t - 1] };
        if down {
            1.0 - before
        } else {
            before
        }
    };
    let lf = len as f64;
    for t in initial.min(nt)..nt {
        let idx = vec![("g", g + 1), ("t", t + 1)];
        let switched = state(t) - prev(t);
        if t + len <= nt {
            let held: f64 = (t..t + len).map(state).sum();
            o.ge(window_eq, idx, held, lf * switched, lf);
        } else {
            let rest = (nt - t) as f64;
            let held: f64 = (t..nt).map(state).sum();
            o.ge(tail_eq, idx, held - rest * switched, 0.0, rest);
        }
    }
}

/// SOC recursion, limits and end-of-window target for pair `q` along one
/// trajectory (`k = 0` for pre-contingency).
#[allow(clippy::too_many_arguments)]
fn check_soc(
    inst: &Instance,
    q: usize,
    k: usize,
    s: &Schedule,
    soc: &[f64],
    charge_pr: &[f64],
    discharge_pr: &[f64],
    o: &mut Oracle,
) {
    let pair = inst.pev_pairs()[q];
    let group = &inst.pev_groups[pair.v];
    let nv = f64::from(pair.count);
    let eta = group.efficiency;
    let mut before = nv * group.e_initial;
    for t in (group.window_start - 1)..group.window_end {
        let idx = vec![("v", pair.v + 1), ("n", pair.n + 1), ("t", t + 1), ("k", k)];
        let expected = before + eta * (s.charge[q][t] - charge_pr[t]) - (s.discharge[q][t] + discharge_pr[t]) / eta;
        o.eq("Eq25", idx.clone(), soc[t], expected, (1.0f64).max(1.0 / eta));
        o.within("Eq26", idx.clone(), soc[t], nv * group.e_min, nv * group.e_max);
        if t + 1 == group.window_end {
            o.ge("Eq24", idx, soc[t], nv * group.e_final, 1.0);
        }
        before = soc[t];
    }
}

fn check_post(inst: &Instance, mode: CaseMode, s: &Schedule, r: &ContingencyResponse, o: &mut Oracle) {
    let nt = inst.n_periods();
    let nc = inst.conventional_units.len();
    let pairs = inst.pev_pairs();
    let d_pr = inst.system.d_pr;
    let dt = inst.system.period_length;

    for (q, pair) in pairs.iter().enumerate() {
        let group = &inst.pev_groups[pair.v];
        for t in 0..nt {
            let idx = vec![("v", pair.v + 1), ("n", pair.n + 1), ("t", t + 1)];
            let cap = r.capacity[q][t];
            if !group.connected(t) || mode == CaseMode::GeneratorsOnly {
                o.eq("Eq37", idx, cap, 0.0, 1.0);
            } else {
                o.ge("Eq37", idx, cap, 0.0, 1.0);
            }
        }
    }

    for (k, contingency) in inst.contingencies.iter().enumerate() {
        let lost: Vec<bool> = (0..inst.n_units())
            .map(|g| contingency.outaged_units.iter().any(|id| id == inst.unit_id(g)))
            .collect();
        for t in 0..nt {
            let df = r.delta_f[k][t];
            o.within("Eq18", vec![("t", t + 1), ("k", k + 1)], df, -inst.system.delta_f_max, 0.0);
            let mut balance = 0.0;
            for g in 0..inst.n_units() {
                let idx = vec![("g", g + 1), ("t", t + 1), ("k", k + 1)];
                let pfr = r.pfr[k][g][t];
                balance += pfr;
                if lost[g] {
                    o.eq("Eq21", idx, pfr, -s.p[g][t], 1.0);
                } else if g < nc {
                    let unit = &inst.conventional_units[g];
                    o.ge("Eq18", idx.clone(), pfr, 0.0, 1.0);
                    o.le("Eq18", idx.clone(), pfr, -df / unit.droop, (1.0f64).max(1.0 / unit.droop));
                    o.le("Eq19", idx, pfr + s.p[g][t], unit.p_max * s.u[g][t], (1.0f64).max(unit.p_max));
                } else {
                    o.eq("Eq20", idx, pfr, 0.0, 1.0);
                }
            }
            for (d, c) in inst.consumers.iter().enumerate() {
                let idx = vec![("d", d + 1), ("t", t + 1), ("k", k + 1)];
                let shed = r.unserved[k][d][t];
                balance += shed;
                o.ge("Eq22", idx.clone(), shed, 0.0, 1.0);
                o.within("Eq22", idx, s.unserved[d][t] + shed, 0.0, c.demand[t]);
            }
            for (q, pair) in pairs.iter().enumerate() {
                if inst.pev_groups[pair.v].connected(t) {
                    balance += r.pev_response[k][q][t];
                }
            }
            o.eq("Eq22", vec![("t", t + 1), ("k", k + 1)], balance, 0.0, 1.0);
        }

        for (q, pair) in pairs.iter().enumerate() {
            let group = &inst.pev_groups[pair.v];
            let nv = f64::from(pair.count);
            let rate = nv * group.p_max;
            for t in 0..nt {
                let idx = vec![("v", pair.v + 1), ("n", pair.n + 1), ("t", t + 1), ("k", k + 1)];
                let prc = r.pev_charge_mode[k][q][t];
                let prd = r.pev_discharge_mode[k][q][t];
                let pr = r.pev_response[k][q][t];
                let ecpr = r.charge_energy[k][q][t];
                let edpr = r.discharge_energy[k][q][t];
                if !group.connected(t) {
                    for value in [prc, prd, pr, ecpr, edpr, r.soc[k][q][t]] {
                        o.eq("Eq36", idx.clone(), value, 0.0, 1.0);
                    }
                    continue;
                }
                let sc = (1.0f64).max(d_pr);
                o.eq("Eq28", idx.clone(), ecpr, d_pr * prc, sc);
                o.le("Eq29", idx.clone(), d_pr * prc, s.charge[q][t], sc);
                o.eq("Eq30", idx.clone(), edpr, d_pr * prd, sc);
                o.le("Eq31", idx.clone(), s.discharge[q][t], rate * dt - d_pr * prd, sc);
                o.within("Eq32", idx.clone(), prc, 0.0, rate);
                o.within("Eq33", idx.clone(), prd, 0.0, rate);
                o.eq("Eq34", idx.clone(), pr, prc + prd, 1.0);
                o.ge("Eq35", idx.clone(), pr, 0.0, 1.0);
                let df = r.delta_f[k][t];
                o.le("Eq35", idx.clone(), pr, -df / group.droop, (1.0f64).max(1.0 / group.droop));
                o.le("Eq37", idx, pr, r.capacity[q][t], 1.0);
            }
            check_soc(inst, q, k + 1, s, &r.soc[k][q], &r.charge_energy[k][q], &r.discharge_energy[k][q], o);
        }
    }
}
