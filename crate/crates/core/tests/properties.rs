mod common;

use common::close;
use gridsched_core::domain::Instance;
use gridsched_core::formulation::{build, CaseConfig, CaseMode, FormulationError};
use gridsched_core::io::{parse_instance, parse_instance_unchecked, parse_mps, serialize_instance, to_mps_string};
use gridsched_core::solve::{solve_case, SolveError, SolveOptions};
use gridsched_core::testgen::small_instance;
use proptest::prelude::*;
use serde_json::Value;

fn numeric_leaves(v: &Value, at: String, out: &mut Vec<String>) {
    match v {
        Value::Number(_) => out.push(at),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, x)| numeric_leaves(x, format!("{at}/{i}"), out)),
        Value::Object(map) => map.iter().for_each(|(k, x)| numeric_leaves(x, format!("{at}/{k}"), out)),
        _ => {}
    }
}

fn leaf_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        (-2.0f64..2.0).prop_map(Value::from),
        (-3i64..30).prop_map(Value::from),
        Just(Value::from(0.0)),
        Just(Value::from(1e12)),
    ]
}

fn scale_prices(inst: &Instance, lambda: f64) -> Instance {
    let mut out = inst.clone();
    out.system.c_unserved *= lambda;
    out.system.c_spill *= lambda;
    out.system.c_freq *= lambda;
    for u in &mut out.conventional_units {
        u.cost *= lambda;
        u.su_cost *= lambda;
        u.sd_cost *= lambda;
    }
    for u in &mut out.renewable_units {
        u.cost *= lambda;
    }
    for g in &mut out.pev_groups {
        g.capacity_offer *= lambda;
        g.deployment_offer *= lambda;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn validation_is_total_on_mutated_documents(seed in 0u64..500, pick in any::<prop::sample::Index>(), value in leaf_value()) {
        let mut doc = serde_json::to_value(small_instance(seed)).unwrap();
        let mut leaves = Vec::new();
        numeric_leaves(&doc, String::new(), &mut leaves);
        *doc.pointer_mut(&leaves[pick.index(leaves.len())]).unwrap() = value;
        let text = doc.to_string();
        if let Ok(inst) = parse_instance_unchecked(&text) {
            let violations = inst.validate();
            match build(&inst, CaseConfig::new(CaseMode::GeneratorsAndPevs)) {
                Ok(_) => prop_assert!(violations.is_empty()),
                Err(FormulationError::InvalidInstance(v)) => prop_assert_eq!(v, violations),
                Err(e) => prop_assert!(false, "unexpected build error {e}"),
            }
            prop_assert_eq!(parse_instance(&text).is_ok(), inst.validate().is_empty());
        }
    }

    #[test]
    fn instance_json_round_trips(seed in 0u64..10_000) {
        let inst = small_instance(seed);
        prop_assert_eq!(parse_instance(&serialize_instance(&inst)).unwrap(), inst);
    }

    #[test]
    fn total_demand_is_linear(seed in 0u64..10_000, lambda in 0.0f64..5.0) {
        let inst = small_instance(seed);
        let mut scaled = inst.clone();
        for c in &mut scaled.consumers {
            c.demand.iter_mut().for_each(|d| *d *= lambda);
        }
        for t in 1..=inst.n_periods() {
            let base = inst.total_demand(t).unwrap();
            prop_assert!(close(scaled.total_demand(t).unwrap(), lambda * base, 1e-12));
        }
    }

    #[test]
    fn mps_round_trips(seed in 0u64..10_000, case in 1u8..=3) {
        let inst = small_instance(seed);
        let f = build(&inst, CaseConfig::new(CaseMode::from_number(case).unwrap())).unwrap();
        let text = to_mps_string(&f.model, "m");
        let (back, _) = parse_mps(&text).unwrap();
        prop_assert_eq!(back.columns(), f.model.columns());
        prop_assert_eq!(back.rows(), f.model.rows());
        prop_assert_eq!(to_mps_string(&back, "m"), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn scaling_every_price_scales_the_optimum(seed in 0u64..10_000, lambda in prop_oneof![Just(0.5), Just(2.0), Just(7.5)]) {
        let inst = small_instance(seed);
        let opts = SolveOptions::default();
        for mode in [CaseMode::NoReserve, CaseMode::GeneratorsAndPevs] {
            let base = solve_case(&inst, mode, &opts, None);
            let scaled = solve_case(&scale_prices(&inst, lambda), mode, &opts, None);
            match (base, scaled) {
                (Ok(base), Ok(scaled)) => prop_assert!(
                    close(scaled.objective, lambda * base.objective, 1e-5),
                    "{:?}: {} vs {}", mode, scaled.objective, lambda * base.objective
                ),
                (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
                (a, b) => prop_assert!(false, "{:?}: {:?} vs {:?}", mode, a.err(), b.err()),
            }
        }
    }

    #[test]
    fn pev_reserve_never_costs_more(seed in 10_000u64..20_000) {
        let inst = small_instance(seed);
        let opts = SolveOptions::default();
        let three = solve_case(&inst, CaseMode::GeneratorsAndPevs, &opts, None).unwrap();
        match solve_case(&inst, CaseMode::GeneratorsOnly, &opts, None) {
            Ok(two) => prop_assert!(three.objective <= two.objective + 1e-6 * (1.0 + two.objective.abs())),
            Err(SolveError::Infeasible { case: 2 }) => {}
            Err(e) => prop_assert!(false, "case 2 failed: {e}"),
        }
    }
}
