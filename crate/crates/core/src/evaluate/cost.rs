use serde::{Deserialize, Serialize};

use super::{ContingencyResponse, Schedule};
use crate::domain::Instance;
use crate::formulation::BuildOptions;

/// Objective decomposition: the five reserve-study columns first,
/// followed by the remaining pre-contingency terms. All values in currency.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub production: f64,
    pub post_contingency_unserved: f64,
    pub frequency_deviation: f64,
    pub pev_capacity: f64,
    pub pev_deployment: f64,
    pub startup: f64,
    pub shutdown: f64,
    pub unserved: f64,
    pub spillage: f64,
    pub total: f64,
}

impl CostReport {
    pub fn component_sum(&self) -> f64 {
        self.production
            + self.post_contingency_unserved
            + self.frequency_deviation
            + self.pev_capacity
            + self.pev_deployment
            + self.startup
            + self.shutdown
            + self.unserved
            + self.spillage
    }

    /// Pre-contingency part of the objective.
    pub fn pre_contingency(&self) -> f64 {
        self.production + self.startup + self.shutdown + self.unserved + self.spillage
    }
}

/// Prices every objective term from the instance. Contingency terms are
/// summed over whatever contingencies `response` holds; an empty response
/// contributes nothing.
pub fn cost_report(inst: &Instance, schedule: &Schedule, response: &ContingencyResponse, options: BuildOptions) -> CostReport {
    let nt = inst.n_periods();
    let sys = &inst.system;
    let dt = sys.period_length;
    let nc = inst.conventional_units.len();
    let pairs = inst.pev_pairs();
    let mut r = CostReport::default();

    for t in 0..nt {
        for (g, unit) in inst.conventional_units.iter().enumerate() {
            r.production += unit.cost * schedule.p[g][t] * dt;
            r.startup += schedule.startup_cost[g][t];
            r.shutdown += schedule.shutdown_cost[g][t];
        }
        for (i, unit) in inst.renewable_units.iter().enumerate() {
            r.production += unit.cost * schedule.p[nc + i][t] * dt;
            r.spillage += sys.c_spill * schedule.spill[i][t] * dt;
        }
        for d in 0..inst.consumers.len() {
            r.unserved += sys.c_unserved * schedule.unserved[d][t] * dt;
        }
        for (q, pair) in pairs.iter().enumerate() {
            if let Some(row) = response.capacity.get(q) {
                r.pev_capacity += inst.pev_groups[pair.v].capacity_offer_at(t) * row[t];
            }
        }
    }

    let freq_weight = if options.per_consumer_freq_penalty { inst.consumers.len() as f64 } else { 1.0 };
    for k in 0..response.n_contingencies() {
        for t in 0..nt {
            r.frequency_deviation += -sys.c_freq * freq_weight * response.delta_f[k][t];
            for d in 0..inst.consumers.len() {
                r.post_contingency_unserved += sys.c_unserved * response.unserved[k][d][t] * dt;
            }
            for (q, pair) in pairs.iter().enumerate() {
                let cp = inst.pev_groups[pair.v].deployment_offer_at(t);
                let energy = if options.literal_deployment_cost { 1.0 } else { sys.d_pr };
                r.pev_deployment += cp * energy * response.pev_response[k][q][t];
            }
        }
    }
    r.total = r.component_sum();
    r
}
