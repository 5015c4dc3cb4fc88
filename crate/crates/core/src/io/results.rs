//! Result bundle: one directory of CSV tables plus `costs.json` and
//! `meta.json`.
//!
//! | file | header |
//! |------|--------|
//! | `schedule.csv` | `g,t,p,u,spill,c_startup,c_shutdown` |
//! | `pev.csv` | `v,n,t,e_charge,e_discharge,soc,capacity` |
//! | `pfr.csv` | `k,t,g_or_group,response,charge_mode,discharge_mode,charge_energy,discharge_energy,soc` |
//! | `freq.csv` | `k,t,delta_f` |
//! | `unserved.csv` | `d,t,k_or_pre,value` |
//! | `flows.csv` | `l,t,flow` |
//! | `angles.csv` | `n,t,theta` |
//!
//! Units, buses, consumers, lines, groups and contingencies are referred to
//! by their instance ids; PEV locations in `pfr.csv` are `group@bus`.
//! Periods are 1-based. Cells that do not apply (e.g. `u` for a renewable
//! unit) are empty. Numbers carry 9 significant digits.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::domain::{Instance, FORMAT_VERSION};
use crate::evaluate::{ContingencyResponse, CostReport, Schedule};
use crate::formulation::CaseMode;

pub const BUNDLE_FILES: [&str; 9] = [
    "schedule.csv",
    "pev.csv",
    "pfr.csv",
    "freq.csv",
    "unserved.csv",
    "flows.csv",
    "angles.csv",
    "costs.json",
    "meta.json",
];

const SCHEDULE_HEADER: [&str; 7] = ["g", "t", "p", "u", "spill", "c_startup", "c_shutdown"];
const PEV_HEADER: [&str; 7] = ["v", "n", "t", "e_charge", "e_discharge", "soc", "capacity"];
const PFR_HEADER: [&str; 9] = [
    "k",
    "t",
    "g_or_group",
    "response",
    "charge_mode",
    "discharge_mode",
    "charge_energy",
    "discharge_energy",
    "soc",
];
const FREQ_HEADER: [&str; 3] = ["k", "t", "delta_f"];
const UNSERVED_HEADER: [&str; 4] = ["d", "t", "k_or_pre", "value"];
const FLOWS_HEADER: [&str; 3] = ["l", "t", "flow"];
const ANGLES_HEADER: [&str; 3] = ["n", "t", "theta"];

/// Run information. `runtime_seconds` is the only field that varies
/// between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub format_version: String,
    pub case: u8,
    pub mode: CaseMode,
    pub status: String,
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub nodes: u64,
    pub rel_gap: f64,
    pub abs_gap: f64,
    pub node_limit: Option<u64>,
    pub seed: Option<u64>,
    pub runtime_seconds: f64,
}

impl RunMeta {
    pub fn new(mode: CaseMode) -> Self {
        RunMeta {
            format_version: FORMAT_VERSION.to_string(),
            case: mode.number(),
            mode,
            status: String::new(),
            objective: 0.0,
            bound: 0.0,
            gap: 0.0,
            nodes: 0,
            rel_gap: 0.0,
            abs_gap: 0.0,
            node_limit: None,
            seed: None,
            runtime_seconds: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub meta: RunMeta,
    pub schedule: Schedule,
    pub response: ContingencyResponse,
    pub costs: CostReport,
}

/// Rounds to 9 significant digits and prints the shortest decimal form.
pub fn format_number(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().expect("float formatting round-trips");
    if rounded == 0.0 {
        "0".to_string()
    } else {
        rounded.to_string()
    }
}

fn pev_label(inst: &Instance, v: usize, n: usize) -> String {
    format!("{}@{}", inst.pev_groups[v].id, inst.buses[n].id)
}

struct Table {
    file: &'static str,
    writer: csv::Writer<fs::File>,
}

impl Table {
    fn create(dir: &Path, file: &'static str, header: &[&str]) -> Result<Self, IoError> {
        let path = dir.join(file);
        let mut writer = csv::Writer::from_path(&path).map_err(|e| csv_error(file, e))?;
        writer.write_record(header).map_err(|e| csv_error(file, e))?;
        Ok(Table { file, writer })
    }

    fn row(&mut self, cells: &[String]) -> Result<(), IoError> {
        self.writer.write_record(cells).map_err(|e| csv_error(self.file, e))
    }

    fn finish(mut self) -> Result<(), IoError> {
        self.writer.flush().map_err(|e| IoError::Bundle {
            file: self.file.to_string(),
            message: e.to_string(),
        })
    }
}

fn csv_error(file: &str, e: csv::Error) -> IoError {
    IoError::Bundle {
        file: file.to_string(),
        message: e.to_string(),
    }
}

/// Writes the bundle into `dir`, creating it if needed and overwriting
/// existing files.
pub fn write_results(inst: &Instance, bundle: &ResultBundle, dir: impl AsRef<Path>) -> Result<(), IoError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    let nt = inst.n_periods();
    let nc = inst.conventional_units.len();
    let pairs = inst.pev_pairs();
    let s = &bundle.schedule;
    let r = &bundle.response;
    let f = format_number;
    let blank = String::new;

    let mut table = Table::create(dir, "schedule.csv", &SCHEDULE_HEADER)?;
    for g in 0..inst.n_units() {
        for t in 0..nt {
            let (u, spill, su, sd) = if g < nc {
                (f(s.u[g][t]), blank(), f(s.startup_cost[g][t]), f(s.shutdown_cost[g][t]))
            } else {
                (blank(), f(s.spill[g - nc][t]), blank(), blank())
            };
            table.row(&[inst.unit_id(g).to_string(), (t + 1).to_string(), f(s.p[g][t]), u, spill, su, sd])?;
        }
    }
    table.finish()?;

    let mut table = Table::create(dir, "pev.csv", &PEV_HEADER)?;
    for (q, pair) in pairs.iter().enumerate() {
        for t in 0..nt {
            table.row(&[
                inst.pev_groups[pair.v].id.clone(),
                inst.buses[pair.n].id.clone(),
                (t + 1).to_string(),
                f(s.charge[q][t]),
                f(s.discharge[q][t]),
                f(s.soc[q][t]),
                f(r.capacity.get(q).map_or(0.0, |row| row[t])),
            ])?;
        }
    }
    table.finish()?;

    let mut table = Table::create(dir, "pfr.csv", &PFR_HEADER)?;
    for k in 0..r.n_contingencies() {
        let kid = &inst.contingencies[k].id;
        for t in 0..nt {
            for g in 0..inst.n_units() {
                let mut cells = vec![kid.clone(), (t + 1).to_string(), inst.unit_id(g).to_string(), f(r.pfr[k][g][t])];
                cells.extend((0..5).map(|_| blank()));
                table.row(&cells)?;
            }
            for (q, pair) in pairs.iter().enumerate() {
                table.row(&[
                    kid.clone(),
                    (t + 1).to_string(),
                    pev_label(inst, pair.v, pair.n),
                    f(r.pev_response[k][q][t]),
                    f(r.pev_charge_mode[k][q][t]),
                    f(r.pev_discharge_mode[k][q][t]),
                    f(r.charge_energy[k][q][t]),
                    f(r.discharge_energy[k][q][t]),
                    f(r.soc[k][q][t]),
                ])?;
            }
        }
    }
    table.finish()?;

    let mut table = Table::create(dir, "freq.csv", &FREQ_HEADER)?;
    for k in 0..r.n_contingencies() {
        for t in 0..nt {
            table.row(&[inst.contingencies[k].id.clone(), (t + 1).to_string(), f(r.delta_f[k][t])])?;
        }
    }
    table.finish()?;

    let mut table = Table::create(dir, "unserved.csv", &UNSERVED_HEADER)?;
    for (d, c) in inst.consumers.iter().enumerate() {
        for t in 0..nt {
            table.row(&[c.id.clone(), (t + 1).to_string(), "pre".to_string(), f(s.unserved[d][t])])?;
        }
    }
    for k in 0..r.n_contingencies() {
        for (d, c) in inst.consumers.iter().enumerate() {
            for t in 0..nt {
                table.row(&[c.id.clone(), (t + 1).to_string(), inst.contingencies[k].id.clone(), f(r.unserved[k][d][t])])?;
            }
        }
    }
    table.finish()?;

    let mut table = Table::create(dir, "flows.csv", &FLOWS_HEADER)?;
    for (l, line) in inst.lines.iter().enumerate() {
        for t in 0..nt {
            table.row(&[line.id.clone(), (t + 1).to_string(), f(s.flow[l][t])])?;
        }
    }
    table.finish()?;

    let mut table = Table::create(dir, "angles.csv", &ANGLES_HEADER)?;
    for (n, bus) in inst.buses.iter().enumerate() {
        for t in 0..nt {
            table.row(&[bus.id.clone(), (t + 1).to_string(), f(s.angle[n][t])])?;
        }
    }
    table.finish()?;

    write_json(dir, "costs.json", &bundle.costs)?;
    write_json(dir, "meta.json", &bundle.meta)?;
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, file: &str, value: &T) -> Result<(), IoError> {
    let path = dir.join(file);
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| IoError::io(&path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(dir: &Path, file: &str) -> Result<T, IoError> {
    let path = dir.join(file);
    let text = fs::read_to_string(&path).map_err(|e| IoError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::Bundle {
        file: file.to_string(),
        message: e.to_string(),
    })
}

struct Records {
    file: &'static str,
    rows: Vec<csv::StringRecord>,
    line: usize,
}

impl Records {
    fn open(dir: &Path, file: &'static str, header: &[&str]) -> Result<Self, IoError> {
        let path = dir.join(file);
        let mut reader = csv::Reader::from_path(&path).map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => IoError::io(&path, std::io::Error::other(e.to_string())),
            _ => csv_error(file, e),
        })?;
        let found = reader.headers().map_err(|e| csv_error(file, e))?.clone();
        if found.iter().ne(header.iter().copied()) {
            return Err(IoError::Bundle {
                file: file.to_string(),
                message: format!("header {:?}, expected {:?}", found.iter().collect::<Vec<_>>(), header),
            });
        }
        let rows = reader.records().collect::<Result<Vec<_>, _>>().map_err(|e| csv_error(file, e))?;
        Ok(Records { file, rows, line: 1 })
    }

    fn err(&self, message: String) -> IoError {
        IoError::Bundle {
            file: self.file.to_string(),
            message: format!("line {}: {message}", self.line),
        }
    }

    fn id(&self, ids: &[&str], value: &str) -> Result<usize, IoError> {
        ids.iter().position(|&id| id == value).ok_or_else(|| self.err(format!("unknown id {value:?}")))
    }

    fn period(&self, value: &str, nt: usize) -> Result<usize, IoError> {
        match value.parse::<usize>() {
            Ok(t) if (1..=nt).contains(&t) => Ok(t - 1),
            _ => Err(self.err(format!("bad period {value:?}"))),
        }
    }

    fn num(&self, value: &str) -> Result<f64, IoError> {
        value.parse::<f64>().map_err(|_| self.err(format!("bad number {value:?}")))
    }

    /// Parsed number, or `None` for an empty cell.
    fn opt(&self, value: &str) -> Result<Option<f64>, IoError> {
        if value.is_empty() {
            Ok(None)
        } else {
            self.num(value).map(Some)
        }
    }
}

/// Reads a bundle written by [`write_results`] for the same instance.
pub fn read_results(inst: &Instance, dir: impl AsRef<Path>) -> Result<ResultBundle, IoError> {
    let dir = dir.as_ref();
    let nt = inst.n_periods();
    let nc = inst.conventional_units.len();
    let pairs = inst.pev_pairs();
    let unit_ids: Vec<&str> = (0..inst.n_units()).map(|g| inst.unit_id(g)).collect();
    let bus_ids: Vec<&str> = inst.buses.iter().map(|b| b.id.as_str()).collect();
    let group_ids: Vec<&str> = inst.pev_groups.iter().map(|v| v.id.as_str()).collect();
    let consumer_ids: Vec<&str> = inst.consumers.iter().map(|d| d.id.as_str()).collect();
    let line_ids: Vec<&str> = inst.lines.iter().map(|l| l.id.as_str()).collect();
    let k_ids: Vec<&str> = inst.contingencies.iter().map(|k| k.id.as_str()).collect();
    let pev_labels: Vec<String> = pairs.iter().map(|p| pev_label(inst, p.v, p.n)).collect();
    let pair_index = |rec: &Records, v: usize, n: usize| {
        pairs
            .iter()
            .position(|p| p.v == v && p.n == n)
            .ok_or_else(|| rec.err("no vehicles at this location".to_string()))
    };

    let meta: RunMeta = read_json(dir, "meta.json")?;
    let costs: CostReport = read_json(dir, "costs.json")?;
    let mut s = Schedule::zeros(inst);
    let mut r = ContingencyResponse::zeros(inst);

    let mut rec = Records::open(dir, "schedule.csv", &SCHEDULE_HEADER)?;
    for row in std::mem::take(&mut rec.rows) {
        rec.line += 1;
        let g = rec.id(&unit_ids, &row[0])?;
        let t = rec.period(&row[1], nt)?;
        s.p[g][t] = rec.num(&row[2])?;
        if g < nc {
            s.u[g][t] = rec.num(&row[3])?;
            s.startup_cost[g][t] = rec.num(&row[5])?;
            s.shutdown_cost[g][t] = rec.num(&row[6])?;
        } else {
            s.spill[g - nc][t] = rec.num(&row[4])?;
        }
    }

    let mut rec = Records::open(dir, "pev.csv", &PEV_HEADER)?;
    for row in std::mem::take(&mut rec.rows) {
        rec.line += 1;
        let v = rec.id(&group_ids, &row[0])?;
        let n = rec.id(&bus_ids, &row[1])?;
        let q = pair_index(&rec, v, n)?;
        let t = rec.period(&row[2], nt)?;
        s.charge[q][t] = rec.num(&row[3])?;
        s.discharge[q][t] = rec.num(&row[4])?;
        s.soc[q][t] = rec.num(&row[5])?;
        r.capacity[q][t] = rec.num(&row[6])?;
    }

    let mut rec = Records::open(dir, "pfr.csv", &PFR_HEADER)?;
    for row in std::mem::take(&mut rec.rows) {
        rec.line += 1;
        let k = rec.id(&k_ids, &row[0])?;
        let t = rec.period(&row[1], nt)?;
        let response = rec.num(&row[3])?;
        if let Some(q) = pev_labels.iter().position(|l| l == &row[2]) {
            r.pev_response[k][q][t] = response;
            r.pev_charge_mode[k][q][t] = rec.num(&row[4])?;
            r.pev_discharge_mode[k][q][t] = rec.num(&row[5])?;
            r.charge_energy[k][q][t] = rec.num(&row[6])?;
            r.discharge_energy[k][q][t] = rec.num(&row[7])?;
            r.soc[k][q][t] = rec.num(&row[8])?;
        } else {
            let g = rec.id(&unit_ids, &row[2])?;
            r.pfr[k][g][t] = response;
            for cell in 4..9 {
                if rec.opt(&row[cell])?.is_some() {
                    return Err(rec.err(format!("unit row has a value in column {}", PFR_HEADER[cell])));
                }
            }
        }
    }

    let mut rec = Records::open(dir, "freq.csv", &FREQ_HEADER)?;
    for row in std::mem::take(&mut rec.rows) {
        rec.line += 1;
        let k = rec.id(&k_ids, &row[0])?;
        let t = rec.period(&row[1], nt)?;
        r.delta_f[k][t] = rec.num(&row[2])?;
    }

    let mut rec = Records::open(dir, "unserved.csv", &UNSERVED_HEADER)?;
    for row in std::mem::take(&mut rec.rows) {
        rec.line += 1;
        let d = rec.id(&consumer_ids, &row[0])?;
        let t = rec.period(&row[1], nt)?;
        let value = rec.num(&row[3])?;
        if &row[2] == "pre" {
            s.unserved[d][t] = value;
        } else {
            let k = rec.id(&k_ids, &row[2])?;
            r.unserved[k][d][t] = value;
        }
    }

    let mut rec = Records::open(dir, "flows.csv", &FLOWS_HEADER)?;
    for row in std::mem::take(&mut rec.rows) {
        rec.line += 1;
        let l = rec.id(&line_ids, &row[0])?;
        let t = rec.period(&row[1], nt)?;
        s.flow[l][t] = rec.num(&row[2])?;
    }

    let mut rec = Records::open(dir, "angles.csv", &ANGLES_HEADER)?;
    for row in std::mem::take(&mut rec.rows) {
        rec.line += 1;
        let n = rec.id(&bus_ids, &row[0])?;
        let t = rec.period(&row[1], nt)?;
        s.angle[n][t] = rec.num(&row[2])?;
    }

    Ok(ResultBundle {
        meta,
        schedule: s,
        response: r,
        costs,
    })
}
