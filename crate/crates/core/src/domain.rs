//! Scheduling instance: network, units, consumers, PEV groups, contingencies
//! and system parameters, with structural validation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_VERSION: &str = "1.0";

fn default_format_version() -> String {
    FORMAT_VERSION.to_string()
}

fn default_currency() -> String {
    "BRL".to_string()
}

fn default_periods() -> usize {
    24
}

fn default_period_length() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: String,
    #[serde(default)]
    pub is_slack: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    /// Per-unit reactance `X_l`.
    pub reactance: f64,
    /// Flow limit per period, MW.
    pub capacity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConventionalUnit {
    pub id: String,
    pub bus: String,
    /// Production cost, currency/MWh.
    pub cost: f64,
    pub p_max: f64,
    pub p_min: f64,
    /// Output in the period before the horizon.
    pub p0: f64,
    pub u0: bool,
    pub su_cost: f64,
    pub sd_cost: f64,
    /// MW per period.
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub min_up: usize,
    pub min_down: usize,
    /// Periods the unit must stay online at the start of the horizon (`TG_g`).
    pub init_must_run: usize,
    /// Periods the unit must stay offline at the start of the horizon (`TC_g`).
    pub init_must_stop: usize,
    /// Hz/MW.
    pub droop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenewableUnit {
    pub id: String,
    pub bus: String,
    #[serde(default)]
    pub cost: f64,
    pub p_max: f64,
    /// Availability factor per period, in [0, 1].
    pub availability: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Consumer {
    pub id: String,
    pub bus: String,
    /// MW per period.
    pub demand: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PevGroup {
    pub id: String,
    /// Vehicle count per bus id.
    pub vehicles: BTreeMap<String, u32>,
    /// MWh per vehicle.
    pub e_max: f64,
    pub e_min: f64,
    pub e_initial: f64,
    pub e_final: f64,
    /// MW per vehicle.
    pub p_max: f64,
    pub efficiency: f64,
    /// First and last connected period, 1-based and inclusive.
    pub window_start: usize,
    pub window_end: usize,
    /// Hz/MW.
    pub droop: f64,
    /// Reserve capacity offer, currency/MW.
    pub capacity_offer: f64,
    /// Reserve deployment offer, currency/MWh.
    pub deployment_offer: f64,
    /// Optional per-period overrides of the two offers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_offer_profile: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deployment_offer_profile: Option<Vec<f64>>,
}

impl PevGroup {
    /// Capacity offer in 0-based period `t`.
    pub fn capacity_offer_at(&self, t: usize) -> f64 {
        self.capacity_offer_profile.as_ref().map_or(self.capacity_offer, |p| p[t])
    }

    pub fn deployment_offer_at(&self, t: usize) -> f64 {
        self.deployment_offer_profile.as_ref().map_or(self.deployment_offer, |p| p[t])
    }

    /// Whether 0-based period `t` lies inside the connection window.
    pub fn connected(&self, t: usize) -> bool {
        t + 1 >= self.window_start && t < self.window_end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Contingency {
    pub id: String,
    pub outaged_units: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    #[serde(default = "default_currency")]
    pub currency: String,
    /// Unserved demand penalty, currency/MWh.
    pub c_unserved: f64,
    /// Renewable spillage penalty, currency/MWh.
    pub c_spill: f64,
    /// Frequency deviation penalty, currency/Hz.
    pub c_freq: f64,
    /// Largest admissible frequency drop, Hz.
    pub delta_f_max: f64,
    /// Duration of the primary response, hours.
    pub d_pr: f64,
    #[serde(default = "default_periods")]
    pub n_periods: usize,
    #[serde(default = "default_period_length")]
    pub period_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    #[serde(default = "default_format_version")]
    pub format_version: String,
    pub system: SystemParams,
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub lines: Vec<Line>,
    #[serde(default)]
    pub conventional_units: Vec<ConventionalUnit>,
    #[serde(default)]
    pub renewable_units: Vec<RenewableUnit>,
    #[serde(default)]
    pub consumers: Vec<Consumer>,
    #[serde(default)]
    pub pev_groups: Vec<PevGroup>,
    #[serde(default)]
    pub contingencies: Vec<Contingency>,
}

/// One failed invariant. `pointer` is a JSON pointer into the instance file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub code: &'static str,
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.code, self.pointer, self.message)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("period {period} outside 1..={n_periods}")]
pub struct PeriodOutOfRange {
    pub period: usize,
    pub n_periods: usize,
}

/// Escapes a key for use as a JSON pointer token.
fn pointer_token(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, code: &'static str, pointer: String, message: impl Into<String>) {
        self.out.push(Violation {
            code,
            pointer,
            message: message.into(),
        });
    }

    fn finite(&mut self, v: f64, pointer: &str) -> bool {
        if v.is_finite() {
            true
        } else {
            self.push("NON_FINITE", pointer.to_string(), format!("value {v} is not finite"));
            false
        }
    }

    fn nonneg(&mut self, v: f64, pointer: String) {
        if self.finite(v, &pointer) && v < 0.0 {
            self.push("NEGATIVE", pointer, format!("value {v} must be >= 0"));
        }
    }

    fn positive(&mut self, v: f64, pointer: String) {
        if self.finite(v, &pointer) && v <= 0.0 {
            self.push("NOT_POSITIVE", pointer, format!("value {v} must be > 0"));
        }
    }

    fn series(&mut self, values: &[f64], n: usize, pointer: &str, lo: f64, hi: f64) {
        if values.len() != n {
            self.push(
                "BAD_LENGTH",
                pointer.to_string(),
                format!("expected {n} periods, found {}", values.len()),
            );
        }
        for (t, &v) in values.iter().enumerate() {
            let p = format!("{pointer}/{t}");
            if self.finite(v, &p) && (v < lo || v > hi) {
                let code = if hi.is_finite() { "OUT_OF_RANGE" } else { "NEGATIVE" };
                let range = if hi.is_finite() { format!("[{lo}, {hi}]") } else { format!(">= {lo}") };
                self.push(code, p, format!("value {v} must be {range}"));
            }
        }
    }

    fn unique<'a>(&mut self, ids: impl Iterator<Item = &'a str>, pointer: &str) {
        let mut seen = HashSet::new();
        for (i, id) in ids.enumerate() {
            if !seen.insert(id) {
                self.push("DUP_ID", format!("{pointer}/{i}/id"), format!("duplicate id {id:?}"));
            }
        }
    }
}

impl Instance {
    pub fn n_periods(&self) -> usize {
        self.system.n_periods
    }

    /// Conventional units first, then renewables: the unit index `g` used by
    /// the formulation and all reports.
    pub fn n_units(&self) -> usize {
        self.conventional_units.len() + self.renewable_units.len()
    }

    pub fn unit_id(&self, g: usize) -> &str {
        let nc = self.conventional_units.len();
        if g < nc {
            &self.conventional_units[g].id
        } else {
            &self.renewable_units[g - nc].id
        }
    }

    pub fn unit_bus(&self, g: usize) -> &str {
        let nc = self.conventional_units.len();
        if g < nc {
            &self.conventional_units[g].bus
        } else {
            &self.renewable_units[g - nc].bus
        }
    }

    /// Total demand of all consumers in 1-based period `t`, MW.
    pub fn total_demand(&self, t: usize) -> Result<f64, PeriodOutOfRange> {
        if t == 0 || t > self.system.n_periods {
            return Err(PeriodOutOfRange {
                period: t,
                n_periods: self.system.n_periods,
            });
        }
        Ok(self.consumers.iter().map(|c| c.demand.get(t - 1).copied().unwrap_or(0.0)).sum())
    }

    /// Every invariant violation of the instance; empty means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut c = Checker { out: Vec::new() };
        let s = &self.system;
        let n = s.n_periods;

        if self.format_version != FORMAT_VERSION {
            c.push(
                "BAD_VERSION",
                "/format_version".into(),
                format!("unsupported format version {:?}", self.format_version),
            );
        }
        if n == 0 {
            c.push("BAD_PERIODS", "/system/n_periods".into(), "horizon must have at least one period");
        }
        c.nonneg(s.c_unserved, "/system/c_unserved".into());
        c.nonneg(s.c_spill, "/system/c_spill".into());
        c.nonneg(s.c_freq, "/system/c_freq".into());
        c.positive(s.delta_f_max, "/system/delta_f_max".into());
        c.positive(s.period_length, "/system/period_length".into());
        c.positive(s.d_pr, "/system/d_pr".into());
        if s.d_pr.is_finite() && s.period_length.is_finite() && s.d_pr > s.period_length {
            c.push(
                "BAD_PR_DURATION",
                "/system/d_pr".into(),
                format!("d_pr {} exceeds the period length {}", s.d_pr, s.period_length),
            );
        }

        // Buses.
        c.unique(self.buses.iter().map(|b| b.id.as_str()), "/buses");
        let bus_ids: HashSet<&str> = self.buses.iter().map(|b| b.id.as_str()).collect();
        let slacks: Vec<usize> = (0..self.buses.len()).filter(|&i| self.buses[i].is_slack).collect();
        match slacks.len() {
            0 => c.push("NO_SLACK", "/buses".into(), "no slack bus"),
            1 => {}
            _ => c.push(
                "DUP_SLACK",
                format!("/buses/{}/is_slack", slacks[1]),
                format!("{} slack buses; exactly one is required", slacks.len()),
            ),
        }
        let bus_ref = |c: &mut Checker, id: &str, pointer: String| {
            if !bus_ids.contains(id) {
                c.push("UNKNOWN_BUS", pointer, format!("unknown bus {id:?}"));
            }
        };

        // Lines.
        c.unique(self.lines.iter().map(|l| l.id.as_str()), "/lines");
        for (i, l) in self.lines.iter().enumerate() {
            let p = format!("/lines/{i}");
            bus_ref(&mut c, &l.from_bus, format!("{p}/from_bus"));
            bus_ref(&mut c, &l.to_bus, format!("{p}/to_bus"));
            if l.from_bus == l.to_bus {
                c.push("SELF_LOOP", format!("{p}/to_bus"), "line starts and ends at the same bus");
            }
            c.positive(l.reactance, format!("{p}/reactance"));
            c.series(&l.capacity, n, &format!("{p}/capacity"), 0.0, f64::INFINITY);
        }

        // Units.
        let all_units = self
            .conventional_units
            .iter()
            .map(|u| u.id.as_str())
            .chain(self.renewable_units.iter().map(|u| u.id.as_str()));
        let mut seen = HashSet::new();
        for (i, id) in all_units.enumerate() {
            if !seen.insert(id) {
                let nc = self.conventional_units.len();
                let p = if i < nc {
                    format!("/conventional_units/{i}/id")
                } else {
                    format!("/renewable_units/{}/id", i - nc)
                };
                c.push("DUP_ID", p, format!("duplicate unit id {id:?}"));
            }
        }
        for (i, u) in self.conventional_units.iter().enumerate() {
            let p = format!("/conventional_units/{i}");
            bus_ref(&mut c, &u.bus, format!("{p}/bus"));
            c.nonneg(u.cost, format!("{p}/cost"));
            c.nonneg(u.p_min, format!("{p}/p_min"));
            c.nonneg(u.p_max, format!("{p}/p_max"));
            if u.p_min > u.p_max {
                c.push("PMIN_GT_PMAX", format!("{p}/p_min"), format!("p_min {} exceeds p_max {}", u.p_min, u.p_max));
            }
            c.nonneg(u.su_cost, format!("{p}/su_cost"));
            c.nonneg(u.sd_cost, format!("{p}/sd_cost"));
            c.nonneg(u.ramp_up, format!("{p}/ramp_up"));
            c.nonneg(u.ramp_down, format!("{p}/ramp_down"));
            c.positive(u.droop, format!("{p}/droop"));
            if u.min_up < 1 {
                c.push("BAD_MIN_UP", format!("{p}/min_up"), "min_up must be >= 1");
            }
            if u.min_down < 1 {
                c.push("BAD_MIN_DOWN", format!("{p}/min_down"), "min_down must be >= 1");
            }
            c.finite(u.p0, &format!("{p}/p0"));
            if u.u0 {
                if u.init_must_stop != 0 {
                    c.push("BAD_INIT_STOP", format!("{p}/init_must_stop"), "must be 0 for a unit that is initially on");
                }
                if u.p0 < u.p_min || u.p0 > u.p_max {
                    c.push(
                        "BAD_P0",
                        format!("{p}/p0"),
                        format!("p0 {} outside [{}, {}] for an online unit", u.p0, u.p_min, u.p_max),
                    );
                }
            } else {
                if u.init_must_run != 0 {
                    c.push("BAD_INIT_RUN", format!("{p}/init_must_run"), "must be 0 for a unit that is initially off");
                }
                if u.p0 != 0.0 {
                    c.push("BAD_P0", format!("{p}/p0"), "p0 must be 0 for an offline unit");
                }
            }
        }
        for (i, u) in self.renewable_units.iter().enumerate() {
            let p = format!("/renewable_units/{i}");
            bus_ref(&mut c, &u.bus, format!("{p}/bus"));
            c.nonneg(u.cost, format!("{p}/cost"));
            c.nonneg(u.p_max, format!("{p}/p_max"));
            c.series(&u.availability, n, &format!("{p}/availability"), 0.0, 1.0);
        }

        // Consumers.
        c.unique(self.consumers.iter().map(|d| d.id.as_str()), "/consumers");
        for (i, d) in self.consumers.iter().enumerate() {
            let p = format!("/consumers/{i}");
            bus_ref(&mut c, &d.bus, format!("{p}/bus"));
            c.series(&d.demand, n, &format!("{p}/demand"), 0.0, f64::INFINITY);
        }

        // PEV groups.
        c.unique(self.pev_groups.iter().map(|v| v.id.as_str()), "/pev_groups");
        for (i, v) in self.pev_groups.iter().enumerate() {
            let p = format!("/pev_groups/{i}");
            for bus in v.vehicles.keys() {
                bus_ref(&mut c, bus, format!("{p}/vehicles/{}", pointer_token(bus)));
            }
            for (name, val) in [
                ("e_max", v.e_max),
                ("e_min", v.e_min),
                ("e_initial", v.e_initial),
                ("e_final", v.e_final),
                ("p_max", v.p_max),
                ("capacity_offer", v.capacity_offer),
                ("deployment_offer", v.deployment_offer),
            ] {
                c.nonneg(val, format!("{p}/{name}"));
            }
            c.positive(v.droop, format!("{p}/droop"));
            if !(v.e_min <= v.e_initial && v.e_initial <= v.e_max) {
                c.push(
                    "BAD_SOC",
                    format!("{p}/e_initial"),
                    format!("need e_min <= e_initial <= e_max, got {} <= {} <= {}", v.e_min, v.e_initial, v.e_max),
                );
            }
            if !(v.e_min <= v.e_final && v.e_final <= v.e_max) {
                c.push(
                    "BAD_SOC",
                    format!("{p}/e_final"),
                    format!("need e_min <= e_final <= e_max, got {} <= {} <= {}", v.e_min, v.e_final, v.e_max),
                );
            }
            if !(v.efficiency > 0.0 && v.efficiency <= 1.0) {
                c.push("BAD_EFFICIENCY", format!("{p}/efficiency"), format!("efficiency {} outside (0, 1]", v.efficiency));
            }
            if !(1 <= v.window_start && v.window_start <= v.window_end && v.window_end <= n) {
                c.push(
                    "BAD_WINDOW",
                    format!("{p}/window_start"),
                    format!("need 1 <= {} <= {} <= {n}", v.window_start, v.window_end),
                );
            }
            if let Some(prof) = &v.capacity_offer_profile {
                c.series(prof, n, &format!("{p}/capacity_offer_profile"), 0.0, f64::INFINITY);
            }
            if let Some(prof) = &v.deployment_offer_profile {
                c.series(prof, n, &format!("{p}/deployment_offer_profile"), 0.0, f64::INFINITY);
            }
        }

        // Contingencies.
        c.unique(self.contingencies.iter().map(|k| k.id.as_str()), "/contingencies");
        let unit_ids: HashSet<&str> = (0..self.n_units()).map(|g| self.unit_id(g)).collect();
        let line_ids: HashSet<&str> = self.lines.iter().map(|l| l.id.as_str()).collect();
        for (i, k) in self.contingencies.iter().enumerate() {
            let p = format!("/contingencies/{i}/outaged_units");
            if k.outaged_units.is_empty() {
                c.push("EMPTY_CONTINGENCY", p.clone(), "contingency outages nothing");
            }
            for (j, id) in k.outaged_units.iter().enumerate() {
                if unit_ids.contains(id.as_str()) {
                    continue;
                }
                if line_ids.contains(id.as_str()) {
                    c.push("LINE_OUTAGE", format!("{p}/{j}"), format!("{id:?} is a line; only unit outages are supported"));
                } else {
                    c.push("UNKNOWN_UNIT", format!("{p}/{j}"), format!("unknown unit {id:?}"));
                }
            }
        }
        c.out
    }

    /// Position of every bus id.
    pub fn bus_index(&self) -> HashMap<&str, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id.as_str(), i)).collect()
    }
}

/// A (PEV group, bus) pair with at least one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PevPair {
    pub v: usize,
    pub n: usize,
    pub count: u32,
}

impl Instance {
    /// Charging locations, ordered by group and then by bus position.
    /// Buses with zero vehicles are skipped.
    pub fn pev_pairs(&self) -> Vec<PevPair> {
        let mut out = Vec::new();
        for (v, group) in self.pev_groups.iter().enumerate() {
            for (n, bus) in self.buses.iter().enumerate() {
                if let Some(&count) = group.vehicles.get(&bus.id) {
                    if count > 0 {
                        out.push(PevPair { v, n, count });
                    }
                }
            }
        }
        out
    }

    /// `outaged[g]` for contingency `k` (the `S_gk` indicator).
    pub fn outaged(&self, k: usize) -> Vec<bool> {
        let ids = &self.contingencies[k].outaged_units;
        (0..self.n_units()).map(|g| ids.iter().any(|id| id == self.unit_id(g))).collect()
    }
}
