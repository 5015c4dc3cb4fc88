use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gridsched"));
    cmd.env_remove("RUST_LOG").env_remove("GRIDSCHED_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn bundled() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/unifap_synthetic.json")
        .to_str()
        .unwrap()
        .to_string()
}

fn unit(id: &str, cost: f64) -> Value {
    json!({
        "id": id, "bus": "b1", "cost": cost, "p_max": 0.6, "p_min": 0.12, "p0": 0.3, "u0": true,
        "su_cost": 909.0, "sd_cost": 9.09, "ramp_up": 0.15, "ramp_down": 0.15,
        "min_up": 1, "min_down": 1, "init_must_run": 0, "init_must_stop": 0, "droop": 2.0
    })
}

fn small(demand: [f64; 3], offers: f64, outages: &[&str]) -> Value {
    json!({
        "system": {
            "c_unserved": 10000.0, "c_spill": 0.0, "c_freq": 1.0, "delta_f_max": 1.0, "d_pr": 0.25, "n_periods": 3
        },
        "buses": [{ "id": "b1", "is_slack": true }],
        "conventional_units": [unit("G1", 505.0), unit("G2", 520.0)],
        "consumers": [{ "id": "d1", "bus": "b1", "demand": demand }],
        "pev_groups": [{
            "id": "V1", "vehicles": { "b1": 10 }, "e_max": 0.052, "e_min": 0.0052,
            "e_initial": 0.02, "e_final": 0.02, "p_max": 0.0066, "efficiency": 0.9,
            "window_start": 1, "window_end": 3, "droop": 10.0,
            "capacity_offer": 50.0 * offers, "deployment_offer": 300.0 * offers
        }],
        "contingencies": outages.iter().enumerate()
            .map(|(k, id)| json!({ "id": format!("k{}", k + 1), "outaged_units": [id] }))
            .collect::<Vec<_>>()
    })
}

fn write(dir: &Path, name: &str, doc: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn comparison(dir: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join("comparison.csv"))
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn total(row: &[String]) -> f64 {
    row.last().unwrap().parse().unwrap()
}

#[test]
fn validate_exit_codes() {
    let out = run(&["validate", "--instance", &bundled()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let mut doc = small([0.3; 3], 1.0, &["G1"]);
    doc["buses"] = json!([{ "id": "b1", "is_slack": true }, { "id": "b2", "is_slack": true }]);
    let out = run(&["validate", "--instance", &write(dir.path(), "two_slack.json", &doc)]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1, "{text}");
    assert!(text.contains("/buses/1/is_slack"), "{text}");

    assert_eq!(code(&run(&["validate", "--instance", "/nonexistent/x.json"])), 2);

    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{ \"system\": ").unwrap();
    assert_eq!(code(&run(&["validate", "--instance", broken.to_str().unwrap()])), 2);

    let mut doc = small([0.3; 3], 1.0, &["G1"]);
    doc["conventional_units"][0]["p_max"] = json!("big");
    assert_eq!(code(&run(&["validate", "--instance", &write(dir.path(), "schema.json", &doc)])), 1);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&run(&[])), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["export", "--instance", &bundled(), "--case", "3", "--format", "lp", "--out", "/tmp/x"])), 64);
    assert_eq!(code(&run(&["solve", "--instance", &bundled(), "--case", "4", "--out", "/tmp/x"])), 64);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn export_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.mps");
    let b = dir.path().join("b.mps");
    for path in [&a, &b] {
        let out = run(&["export", "--instance", &bundled(), "--case", "3", "--format", "mps", "--out", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("NAME unifap_synthetic_case3\n"));
    assert!(text.ends_with("ENDATA\n"));

    let out = run(&["export", "--instance", &bundled(), "--case", "1", "--format", "mps", "--out", "/nonexistent/dir/m.mps"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn solve_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write(dir.path(), "small.json", &small([0.5, 0.7, 0.6], 1.0, &["G1", "G2"]));
    let mut objectives = Vec::new();
    for case in ["1", "2", "3"] {
        let bundle = dir.path().join(format!("case{case}"));
        let out = run(&["solve", "--instance", &instance, "--case", case, "--out", bundle.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let line = stdout(&out);
        assert_eq!(line.lines().count(), 1);
        assert!(line.starts_with(&format!("case={case} objective=")), "{line}");
        for key in [" gap=", " nodes=", " time="] {
            assert!(line.contains(key), "{line}");
        }
        let objective: f64 = line.split_whitespace().nth(1).unwrap().trim_start_matches("objective=").parse().unwrap();
        objectives.push(objective);

        let out = run(&["evaluate", "--instance", &instance, "--results", bundle.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stdout(&out));
        assert!(out.stdout.is_empty());
    }
    assert!(objectives[2] <= objectives[1] + 1e-6);

    // A tampered bundle fails the check.
    let schedule = dir.path().join("case2/schedule.csv");
    let text = fs::read_to_string(&schedule).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut cells: Vec<String> = lines[1].split(',').map(str::to_string).collect();
    cells[2] = "0.59".into();
    lines[1] = cells.join(",");
    fs::write(&schedule, lines.join("\n") + "\n").unwrap();
    let out = run(&["evaluate", "--instance", &instance, "--results", dir.path().join("case2").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(!out.stdout.is_empty());

    let out = run(&["evaluate", "--instance", &instance, "--results", dir.path().join("missing").to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn solve_records_flags_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write(dir.path(), "small.json", &small([0.5, 0.7, 0.6], 1.0, &["G1"]));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out_dir in [&a, &b] {
        let args = [
            "solve", "--instance", &instance, "--case", "3", "--out", out_dir.to_str().unwrap(),
            "--gap", "0.001", "--node-limit", "50", "--seed", "7",
        ];
        assert_eq!(code(&run(&args)), 0);
    }
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        let (x, y) = (fs::read_to_string(a.join(&name)).unwrap(), fs::read_to_string(b.join(&name)).unwrap());
        if name == "meta.json" {
            let mut x: Value = serde_json::from_str(&x).unwrap();
            let mut y: Value = serde_json::from_str(&y).unwrap();
            assert_eq!(x["rel_gap"], json!(0.001));
            assert_eq!(x["node_limit"], json!(50));
            assert_eq!(x["seed"], json!(7));
            assert_eq!(x["case"], json!(3));
            x["runtime_seconds"] = json!(0);
            y["runtime_seconds"] = json!(0);
            assert_eq!(x, y);
        } else {
            assert_eq!(x, y, "{name:?}");
        }
    }
}

#[test]
fn compare_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let instance = write(dir.path(), "small.json", &small([0.5, 0.7, 0.6], 1.0, &["G1", "G2"]));
    let out_dir = dir.path().join("cmp");
    let out = run(&["compare", "--instance", &instance, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 1);

    let rows = comparison(&out_dir);
    assert_eq!(rows.len(), 4);
    assert_eq!(
        rows[0].join(","),
        "case,production,post_contingency_unserved,frequency_deviation,pev_capacity,pev_deployment,startup,shutdown,unserved,spillage,total"
    );
    for (i, row) in rows[1..].iter().enumerate() {
        assert_eq!(row[0], (i + 1).to_string());
        let parts: f64 = row[1..row.len() - 1].iter().map(|c| c.parse::<f64>().unwrap()).sum();
        assert!((parts - total(row)).abs() <= 1e-6 * (1.0 + parts.abs()));
    }
    let totals: Vec<f64> = rows[1..].iter().map(|r| total(r)).collect();
    assert!(totals[2] <= totals[0] && totals[2] <= totals[1], "{totals:?}");
    for case in 1..=3 {
        assert!(out_dir.join(format!("case{case}/meta.json")).is_file());
    }
}

#[test]
fn compare_degenerate_instances() {
    let dir = tempfile::tempdir().unwrap();

    let mut empty = small([0.0; 3], 1.0, &["G1"]);
    empty["conventional_units"] = json!([]);
    empty["pev_groups"] = json!([]);
    empty["contingencies"] = json!([]);
    let out_dir = dir.path().join("empty");
    let out = run(&["compare", "--instance", &write(dir.path(), "empty.json", &empty), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(comparison(&out_dir)[1..].iter().all(|r| total(r) == 0.0));

    let calm = small([0.5, 0.7, 0.6], 0.0, &[]);
    let out_dir = dir.path().join("calm");
    let out = run(&["compare", "--instance", &write(dir.path(), "calm.json", &calm), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let totals: Vec<f64> = comparison(&out_dir)[1..].iter().map(|r| total(r)).collect();
    assert!(totals.iter().all(|t| (t - totals[0]).abs() <= 1e-6 * totals[0]), "{totals:?}");
}

#[test]
fn bundled_case_one_pays_post_contingency_unserved() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--instance", &bundled(), "--case", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let costs: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("costs.json")).unwrap()).unwrap();
    assert!(costs["post_contingency_unserved"].as_f64().unwrap() > 0.0);
}
