mod common;

use common::*;
use gridsched_core::domain::Instance;
use gridsched_core::evaluate::{
    brute_force_commitment, check_feasibility, cost_report, evaluate_ex_post, ContingencyResponse, EvaluateError, ExPostOptions,
    Schedule,
};
use gridsched_core::formulation::{BuildOptions, CaseConfig, CaseMode};
use gridsched_core::io::read_instance;
use gridsched_core::solve::{solve_all, solve_case, SolveError, SolveOptions};
use gridsched_milp::{solve_mip, SolverConfig};
use serde_json::json;

fn pev_instance() -> Instance {
    one_bus(
        2,
        vec![table_unit("G1", "b1"), table_unit("G2", "b1")],
        vec![consumer("d1", "b1", &[0.5, 0.5]), consumer("d2", "b1", &[0.1, 0.1])],
        vec![pev_group("V1", "b1", 10, (1, 2))],
        &["G1"],
    )
}

#[test]
fn zero_solution_of_empty_instance_is_feasible() {
    let inst = one_bus(3, vec![flexible_unit("G1", "b1", 10.0, 1.0)], vec![consumer("d1", "b1", &[0.0; 3])], vec![], &["G1"]);
    for mode in [CaseMode::NoReserve, CaseMode::GeneratorsOnly, CaseMode::GeneratorsAndPevs] {
        let v = check_feasibility(&inst, mode, &Schedule::zeros(&inst), &ContingencyResponse::zeros(&inst)).unwrap();
        assert!(v.is_empty(), "{mode:?}: {v:?}");
    }
}

#[test]
fn soc_below_minimum_is_reported_once_as_eq26() {
    let inst = pev_instance();
    let sol = solve_case(&inst, CaseMode::GeneratorsAndPevs, &SolveOptions::default(), None).unwrap();
    let mode = CaseMode::GeneratorsAndPevs;
    assert!(check_feasibility(&inst, mode, &sol.schedule, &sol.response).unwrap().is_empty());

    let mut r = sol.response.clone();
    let floor = 10.0 * 0.0052;
    r.soc[0][0][1] = 0.5 * floor;
    let v = check_feasibility(&inst, mode, &sol.schedule, &r).unwrap();
    let eq26: Vec<_> = v.iter().filter(|e| e.equation == "Eq26").collect();
    assert_eq!(eq26.len(), 1, "{v:?}");
    assert_eq!(eq26[0].index, vec![("v", 1), ("n", 1), ("t", 2), ("k", 1)]);
}

#[test]
fn perturbed_output_breaks_the_balance() {
    let inst = pev_instance();
    let sol = solve_case(&inst, CaseMode::GeneratorsOnly, &SolveOptions::default(), None).unwrap();
    let mut s = sol.schedule.clone();
    s.p[1][0] += 0.01;
    let v = check_feasibility(&inst, CaseMode::GeneratorsOnly, &s, &sol.response).unwrap();
    assert!(v.iter().any(|e| e.equation == "Eq2"), "{v:?}");
}

#[test]
fn fractional_commitment_is_reported() {
    let inst = pev_instance();
    let sol = solve_case(&inst, CaseMode::NoReserve, &SolveOptions::default(), None).unwrap();
    let mut s = sol.schedule.clone();
    s.u[1][0] = 0.5;
    let v = check_feasibility(&inst, CaseMode::NoReserve, &s, &sol.response).unwrap();
    assert!(v.iter().any(|e| e.equation == "Integrality"), "{v:?}");
}

#[test]
fn dimension_mismatch_is_an_error() {
    let inst = pev_instance();
    let mut s = Schedule::zeros(&inst);
    s.p.pop();
    let r = ContingencyResponse::zeros(&inst);
    assert!(matches!(check_feasibility(&inst, CaseMode::NoReserve, &s, &r), Err(EvaluateError::Dimension(_))));

    let s = Schedule::zeros(&inst);
    let r = ContingencyResponse::empty(&inst);
    assert!(matches!(check_feasibility(&inst, CaseMode::GeneratorsOnly, &s, &r), Err(EvaluateError::Dimension(_))));
}

#[test]
fn zero_solution_costs_nothing() {
    let inst = pev_instance();
    let c = cost_report(&inst, &Schedule::zeros(&inst), &ContingencyResponse::zeros(&inst), BuildOptions::default());
    assert_eq!(c.component_sum(), 0.0);
    assert_eq!(c.total, 0.0);
}

#[test]
fn one_startup_of_unit_two_costs_909() {
    let bundled = read_instance(bundled_path()).unwrap();
    let mut unit = serde_json::to_value(&bundled.conventional_units[1]).unwrap();
    unit["bus"] = json!("b1");
    unit["u0"] = json!(false);
    unit["p0"] = json!(0.0);
    unit["min_up"] = json!(1);
    unit["min_down"] = json!(1);
    unit["ramp_up"] = json!(0.6);
    let inst = one_bus(3, vec![unit], vec![consumer("d1", "b1", &[0.0, 0.0, 0.3])], vec![], &[]);
    let sol = solve_case(&inst, CaseMode::NoReserve, &SolveOptions::default(), None).unwrap();
    assert_eq!(sol.schedule.u[0], vec![0.0, 0.0, 1.0]);
    assert!((sol.costs.startup - 909.0).abs() < 1e-9, "{}", sol.costs.startup);
    assert_eq!(sol.costs.shutdown, 0.0);
}

#[test]
fn totals_match_the_solver_objective() {
    let inst = pev_instance();
    let opts = SolveOptions::default();
    for mode in [CaseMode::GeneratorsOnly, CaseMode::GeneratorsAndPevs] {
        let sol = solve_case(&inst, mode, &opts, None).unwrap();
        assert!(close(sol.costs.total, sol.objective, 1e-6), "{mode:?}");
        assert!(close(sol.costs.total, sol.costs.component_sum(), 1e-12));
        let again = cost_report(&inst, &sol.schedule, &sol.response, opts.build);
        assert!(close(again.total, sol.costs.total, 1e-12));
    }
    let one = solve_case(&inst, CaseMode::NoReserve, &opts, None).unwrap();
    let post = one.costs.post_contingency_unserved + one.costs.frequency_deviation + one.costs.pev_capacity + one.costs.pev_deployment;
    assert!(close(one.costs.total, one.objective + post, 1e-9));
    assert!(close(one.costs.pre_contingency(), one.objective, 1e-9));
}

#[test]
fn pev_capacity_cost_is_offer_times_capacity() {
    let inst = one_bus(
        2,
        vec![table_unit("G1", "b1")],
        vec![consumer("d1", "b1", &[0.3, 0.3])],
        vec![pev_group("V1", "b1", 10, (1, 2))],
        &["G1"],
    );
    let sol = solve_case(&inst, CaseMode::GeneratorsAndPevs, &SolveOptions::default(), None).unwrap();
    let booked: f64 = sol.response.capacity.iter().flatten().sum();
    assert!(booked > 0.0);
    assert!(close(sol.costs.pev_capacity, 50.0 * booked, 1e-12));
}

#[test]
fn losing_the_only_unit_leaves_its_output_unserved() {
    let inst = one_bus(3, vec![table_unit("G1", "b1")], vec![consumer("d1", "b1", &[0.3, 0.35, 0.4])], vec![], &["G1"]);
    let sol = solve_case(&inst, CaseMode::NoReserve, &SolveOptions::default(), None).unwrap();
    let (r, c) = evaluate_ex_post(&inst, &sol.schedule, &ExPostOptions::default()).unwrap();
    let mut served = 0.0;
    for t in 0..3 {
        assert!(sol.schedule.p[0][t] > 0.0);
        assert!((r.unserved[0][0][t] - sol.schedule.p[0][t]).abs() < 1e-9);
        served += sol.schedule.p[0][t];
    }
    assert!(close(c.post_contingency_unserved, 10000.0 * served, 1e-9));
    assert_eq!(r, sol.response);
}

#[test]
fn losing_an_idle_unit_costs_nothing() {
    let inst = one_bus(
        3,
        vec![flexible_unit("G1", "b1", 10.0, 1.0), flexible_unit("G2", "b1", 900.0, 1.0)],
        vec![consumer("d1", "b1", &[0.3, 0.35, 0.4])],
        vec![],
        &["G2"],
    );
    let sol = solve_case(&inst, CaseMode::NoReserve, &SolveOptions::default(), None).unwrap();
    assert!(sol.schedule.p[1].iter().all(|&p| p == 0.0));
    let (r, c) = evaluate_ex_post(&inst, &sol.schedule, &ExPostOptions::default()).unwrap();
    assert!(r.delta_f[0].iter().all(|&f| f.abs() < 1e-12));
    assert!(r.pfr[0].iter().flatten().all(|&p| p.abs() < 1e-12));
    let post = c.post_contingency_unserved + c.frequency_deviation + c.pev_capacity + c.pev_deployment;
    assert!(post.abs() < 1e-9);
}

#[test]
fn loss_feeding_pev_charging_cannot_be_shed() {
    // The only unit charges the fleet with no consumer load to shed, so only
    // PEV response can balance its loss.
    let mut fleet = pev_group("V1", "b1", 10, (1, 2));
    fleet["e_final"] = json!(0.025);
    let inst = one_bus(2, vec![flexible_unit("G1", "b1", 10.0, 1.0)], vec![consumer("d1", "b1", &[0.0, 0.0])], vec![fleet], &["G1"]);
    let opts = SolveOptions::default();
    assert!(matches!(
        solve_case(&inst, CaseMode::NoReserve, &opts, None),
        Err(SolveError::Evaluate(EvaluateError::ExPostFailed { .. }))
    ));
    assert!(matches!(solve_case(&inst, CaseMode::GeneratorsOnly, &opts, None), Err(SolveError::Infeasible { case: 2 })));
    let three = solve_case(&inst, CaseMode::GeneratorsAndPevs, &opts, None).unwrap();
    assert!(three.response.unserved.iter().flatten().flatten().all(|&u| u == 0.0));
    assert!(three.costs.pev_capacity > 0.0);
}

#[test]
fn ex_post_pev_reserve_only_helps() {
    let inst = pev_instance();
    let sol = solve_case(&inst, CaseMode::NoReserve, &SolveOptions::default(), None).unwrap();
    let (_, off) = evaluate_ex_post(&inst, &sol.schedule, &ExPostOptions::default()).unwrap();
    let on_opts = ExPostOptions {
        pev_reserve: true,
        ..Default::default()
    };
    let (r, on) = evaluate_ex_post(&inst, &sol.schedule, &on_opts).unwrap();
    assert!(on.total <= off.total + 1e-6);
    assert!(check_feasibility(&inst, CaseMode::GeneratorsAndPevs, &sol.schedule, &r).unwrap().is_empty());
}

#[test]
fn one_unit_two_periods_enumerates_four_patterns() {
    let mut unit = flexible_unit("G1", "b1", 10.0, 1.0);
    unit["su_cost"] = json!(5.0);
    let inst = one_bus(2, vec![unit], vec![consumer("d1", "b1", &[0.0, 0.4])], vec![], &[]);
    let case = CaseConfig::new(CaseMode::NoReserve);
    let solver = SolverConfig::default();
    let bf = brute_force_commitment(&inst, case, BuildOptions::default(), 1 << 14, &solver).unwrap();
    assert_eq!(bf.patterns, 4);
    let mip = solve_mip(&gridsched_core::formulation::build(&inst, case).unwrap().model, &solver);
    let best = bf.objective.unwrap();
    assert!((best - mip.objective).abs() < 1e-6);
    assert!((best - 9.0).abs() < 1e-9);
}

#[test]
fn pattern_guard() {
    let units = vec![flexible_unit("G1", "b1", 10.0, 1.0), flexible_unit("G2", "b1", 10.0, 1.0)];
    let inst = one_bus(3, units, vec![consumer("d1", "b1", &[0.1; 3])], vec![], &[]);
    let err = brute_force_commitment(&inst, CaseConfig::new(CaseMode::NoReserve), BuildOptions::default(), 32, &SolverConfig::default());
    assert!(matches!(err, Err(EvaluateError::TooManyPatterns { patterns: 64, limit: 32 })));
}

#[test]
fn shortfall_pays_unserved_cost() {
    let inst = one_bus(1, vec![flexible_unit("G1", "b1", 505.0, 0.6)], vec![consumer("d1", "b1", &[0.8])], vec![], &[]);
    let bf = brute_force_commitment(&inst, CaseConfig::new(CaseMode::NoReserve), BuildOptions::default(), 16, &SolverConfig::default())
        .unwrap();
    assert_eq!(bf.feasible_patterns, 2);
    assert!((bf.objective.unwrap() - (505.0 * 0.6 + 10000.0 * 0.2)).abs() < 1e-6);
}

#[test]
fn bundled_cases_order_reserve_costs() {
    let inst = read_instance(bundled_path()).unwrap();
    let [one, two, three] = solve_all(&inst, &SolveOptions::default()).unwrap();
    assert!(one.costs.post_contingency_unserved > two.costs.post_contingency_unserved + 1e-6);

    let pairs = inst.pev_pairs();
    let offered: f64 = pairs
        .iter()
        .enumerate()
        .map(|(q, p)| inst.pev_groups[p.v].capacity_offer * three.response.capacity[q].iter().sum::<f64>())
        .sum();
    assert!(close(three.costs.pev_capacity, offered, 1e-9));
    assert!(three.costs.pev_capacity > 0.0);

    for sol in [&one, &two, &three] {
        let mode = if sol.case == CaseMode::NoReserve { CaseMode::GeneratorsOnly } else { sol.case };
        assert!(check_feasibility(&inst, mode, &sol.schedule, &sol.response).unwrap().is_empty());
    }
}
