//! Seeded generator of small instances for oracle comparisons.
//!
//! Case 3 is feasible by construction: every bus with conventional units
//! carries enough local demand to absorb their minimum output, lines between
//! generating buses are uncongested, and PEV end-of-window targets are
//! reachable. Cases 1 and 2 can still be infeasible when an outaged unit's
//! output exceeds the consumer load left to shed, because PEV charging it
//! supplied cannot be curtailed without PEV response.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{
    Bus, Consumer, Contingency, ConventionalUnit, Instance, Line, PevGroup, RenewableUnit, SystemParams, FORMAT_VERSION,
};

/// Size limits for generated instances.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub max_conventional: usize,
    pub max_periods: usize,
    pub max_buses: usize,
    pub max_contingencies: usize,
    pub max_pev_groups: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_conventional: 2,
            max_periods: 6,
            max_buses: 3,
            max_contingencies: 2,
            max_pev_groups: 1,
        }
    }
}

fn round(x: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (x * s).round() / s
}

/// Small random instance with the default [`Limits`].
pub fn small_instance(seed: u64) -> Instance {
    small_instance_with(seed, Limits::default())
}

pub fn small_instance_with(seed: u64, limits: Limits) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nt = rng.gen_range(2..=limits.max_periods.max(2));
    let nb = rng.gen_range(1..=limits.max_buses.max(1));
    let nc = rng.gen_range(1..=limits.max_conventional.max(1));

    let buses: Vec<Bus> = (0..nb)
        .map(|n| Bus {
            id: format!("b{}", n + 1),
            is_slack: n == 0,
        })
        .collect();

    let mut conventional = Vec::new();
    for g in 0..nc {
        let p_max = round(rng.gen_range(0.3..0.9), 3);
        let p_min = round(p_max * rng.gen_range(0.1..0.4), 3);
        let u0 = rng.gen_bool(0.5);
        let p0 = if u0 { round(rng.gen_range(p_min..=p_max), 3) } else { 0.0 };
        conventional.push(ConventionalUnit {
            id: format!("G{}", g + 1),
            // Units sit on the first two buses.
            bus: buses[g.min(nb - 1).min(1)].id.clone(),
            cost: round(rng.gen_range(50.0..600.0), 1),
            p_max,
            p_min,
            p0,
            u0,
            su_cost: round(rng.gen_range(0.0..1000.0), 1),
            sd_cost: round(rng.gen_range(0.0..100.0), 1),
            ramp_up: round(p_max * rng.gen_range(0.3..1.0), 3),
            // Shutdown from any output level is always possible.
            ramp_down: p_max,
            min_up: rng.gen_range(1..=3),
            min_down: rng.gen_range(1..=3),
            init_must_run: if u0 { rng.gen_range(0..=1) } else { 0 },
            init_must_stop: if u0 { 0 } else { rng.gen_range(0..=1) },
            droop: round(rng.gen_range(0.5..4.0), 2),
        });
    }

    let mut renewable = Vec::new();
    if rng.gen_bool(0.5) {
        renewable.push(RenewableUnit {
            id: format!("G{}", nc + 1),
            bus: buses[rng.gen_range(0..nb)].id.clone(),
            cost: 0.0,
            p_max: round(rng.gen_range(0.1..0.6), 3),
            availability: (0..nt).map(|_| round(rng.gen_range(0.0..1.0), 3)).collect(),
        });
    }

    let total_cap: f64 = conventional.iter().map(|u| u.p_max).sum::<f64>() + renewable.iter().map(|r| r.p_max).sum::<f64>();
    let mut consumers = Vec::new();
    for (n, bus) in buses.iter().enumerate() {
        let local_min: f64 = conventional.iter().filter(|u| u.bus == bus.id).map(|u| u.p_min).sum();
        let base = rng.gen_range(0.1..0.5) * total_cap / nb as f64;
        let demand = (0..nt)
            .map(|_| round(local_min + base * rng.gen_range(0.5..1.5), 3))
            .collect();
        consumers.push(Consumer {
            id: format!("d{}", n + 1),
            bus: bus.id.clone(),
            demand,
        });
    }

    let mut lines = Vec::new();
    for n in 1..nb {
        // The line into bus 2 joins generating buses and never congests; the
        // line into bus 3 may.
        let cap = if n == 1 { round(total_cap, 3) } else { round(rng.gen_range(0.05..0.5), 3) };
        lines.push(Line {
            id: format!("l{n}"),
            from_bus: buses[n - 1].id.clone(),
            to_bus: buses[n].id.clone(),
            reactance: round(rng.gen_range(0.05..0.5), 3),
            capacity: vec![cap; nt],
        });
    }

    let mut pev_groups = Vec::new();
    for v in 0..rng.gen_range(0..=limits.max_pev_groups) {
        let window_start = rng.gen_range(1..=nt);
        let window_end = rng.gen_range(window_start..=nt);
        let e_max = round(rng.gen_range(0.03..0.4), 4);
        let e_min = round(e_max * 0.1, 5);
        let e_initial = round(rng.gen_range(e_min..=e_max), 5);
        let p_max = round(rng.gen_range(0.005..0.02), 4);
        let efficiency = round(rng.gen_range(0.85..=1.0), 3);
        let len = (window_end - window_start + 1) as f64;
        let reachable = (e_initial + 0.5 * len * efficiency * p_max).min(e_max);
        let e_final = round(rng.gen_range(e_min..=reachable), 5).clamp(e_min, reachable);
        let mut vehicles = BTreeMap::new();
        for bus in &buses {
            if rng.gen_bool(0.7) {
                vehicles.insert(bus.id.clone(), rng.gen_range(1..=20));
            }
        }
        pev_groups.push(PevGroup {
            id: format!("V{}", v + 1),
            vehicles,
            e_max,
            e_min,
            e_initial,
            e_final,
            p_max,
            efficiency,
            window_start,
            window_end,
            droop: round(rng.gen_range(0.5..10.0), 2),
            capacity_offer: round(rng.gen_range(0.0..60.0), 1),
            deployment_offer: round(rng.gen_range(0.0..300.0), 1),
            capacity_offer_profile: None,
            deployment_offer_profile: None,
        });
    }

    let n_units = nc + renewable.len();
    let contingencies = (0..rng.gen_range(0..=limits.max_contingencies))
        .map(|k| {
            let g = rng.gen_range(0..n_units);
            let id = if g < nc { conventional[g].id.clone() } else { renewable[g - nc].id.clone() };
            Contingency {
                id: format!("k{}", k + 1),
                outaged_units: vec![id],
            }
        })
        .collect();

    Instance {
        format_version: FORMAT_VERSION.to_string(),
        system: SystemParams {
            currency: "BRL".to_string(),
            c_unserved: 10000.0,
            c_spill: round(rng.gen_range(0.0..50.0), 1),
            c_freq: round(rng.gen_range(0.0..100.0), 1),
            delta_f_max: 1.0,
            d_pr: if rng.gen_bool(0.5) { 0.25 } else { 0.5 },
            n_periods: nt,
            period_length: 1.0,
        },
        buses,
        lines,
        conventional_units: conventional,
        renewable_units: renewable,
        consumers,
        pev_groups,
        contingencies,
    }
}

/// `count` instances from consecutive seeds starting at `first_seed`.
pub fn corpus(first_seed: u64, count: usize) -> Vec<Instance> {
    (0..count as u64).map(|i| small_instance(first_seed + i)).collect()
}
