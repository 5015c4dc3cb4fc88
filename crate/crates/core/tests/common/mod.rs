//! Hand-built instances shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use gridsched_core::domain::Instance;
use serde_json::{json, Value};

pub fn bundled_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/unifap_synthetic.json")
}

pub fn system(n_periods: usize) -> Value {
    json!({
        "c_unserved": 10000.0,
        "c_spill": 0.0,
        "c_freq": 1.0,
        "delta_f_max": 1.0,
        "d_pr": 0.25,
        "n_periods": n_periods
    })
}

/// Conventional unit of the campus study: cost 505, 0.12 to 0.60 MW,
/// initially on at 0.30 MW, startup 909, shutdown 9.09, ramps 0.15.
pub fn table_unit(id: &str, bus: &str) -> Value {
    json!({
        "id": id, "bus": bus, "cost": 505.0, "p_max": 0.60, "p_min": 0.12, "p0": 0.30, "u0": true,
        "su_cost": 909.0, "sd_cost": 9.09, "ramp_up": 0.15, "ramp_down": 0.15,
        "min_up": 1, "min_down": 1, "init_must_run": 0, "init_must_stop": 0, "droop": 2.0
    })
}

/// Unit with free ramps and no transition costs.
pub fn flexible_unit(id: &str, bus: &str, cost: f64, p_max: f64) -> Value {
    json!({
        "id": id, "bus": bus, "cost": cost, "p_max": p_max, "p_min": 0.0, "p0": 0.0, "u0": false,
        "su_cost": 0.0, "sd_cost": 0.0, "ramp_up": p_max, "ramp_down": p_max,
        "min_up": 1, "min_down": 1, "init_must_run": 0, "init_must_stop": 0, "droop": 2.0
    })
}

pub fn consumer(id: &str, bus: &str, demand: &[f64]) -> Value {
    json!({ "id": id, "bus": bus, "demand": demand })
}

/// First PEV group of the campus study with `count` vehicles at `bus`, connected over
/// `window`.
pub fn pev_group(id: &str, bus: &str, count: u32, window: (usize, usize)) -> Value {
    json!({
        "id": id, "vehicles": { bus: count }, "e_max": 0.052, "e_min": 0.0052,
        "e_initial": 0.02, "e_final": 0.02, "p_max": 0.0066, "efficiency": 0.9,
        "window_start": window.0, "window_end": window.1, "droop": 10.0,
        "capacity_offer": 50.0, "deployment_offer": 300.0
    })
}

/// Single-bus instance assembled from the given parts.
pub fn one_bus(n_periods: usize, units: Vec<Value>, consumers: Vec<Value>, pevs: Vec<Value>, outages: &[&str]) -> Instance {
    let contingencies: Vec<Value> = outages
        .iter()
        .enumerate()
        .map(|(k, id)| json!({ "id": format!("k{}", k + 1), "outaged_units": [id] }))
        .collect();
    instance(json!({
        "system": system(n_periods),
        "buses": [{ "id": "b1", "is_slack": true }],
        "conventional_units": units,
        "consumers": consumers,
        "pev_groups": pevs,
        "contingencies": contingencies
    }))
}

pub fn instance(v: Value) -> Instance {
    serde_json::from_value(v).expect("fixture deserializes")
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
