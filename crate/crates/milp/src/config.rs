use std::time::Duration;

/// Variable selection rule for branching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchRule {
    /// Fractional part closest to one half; ties go to the lowest column.
    #[default]
    MostFractional,
    /// Lowest-index fractional binary.
    FirstFractional,
}

/// Order in which open nodes are explored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeOrder {
    /// Lowest bound first; deeper nodes win ties, then lower node ids.
    #[default]
    BestBound,
    DepthFirst,
}

/// Solver settings. Tolerances apply to the internally scaled problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub rel_gap: f64,
    pub abs_gap: f64,
    pub int_tol: f64,
    pub feas_tol: f64,
    /// Reduced-cost tolerance for optimality.
    pub opt_tol: f64,
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub branch_rule: BranchRule,
    pub node_order: NodeOrder,
    /// Consecutive degenerate pivots before Bland's rule takes over.
    pub stall_limit: usize,
    /// Simplex pivots per LP solve before giving up.
    pub iteration_limit: usize,
    /// Fixed-column substitution and empty-row removal.
    pub presolve: bool,
    /// Power-of-two row and column equilibration.
    pub scaling: bool,
    /// Worker cap for callers that fan out independent LPs.
    pub threads: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_gap: 1e-6,
            abs_gap: 1e-6,
            int_tol: 1e-5,
            feas_tol: 1e-8,
            opt_tol: 1e-9,
            node_limit: None,
            time_limit: None,
            branch_rule: BranchRule::default(),
            node_order: NodeOrder::default(),
            stall_limit: 1000,
            iteration_limit: 1_000_000,
            presolve: true,
            scaling: true,
            threads: 1,
        }
    }
}

impl SolverConfig {
    /// True when every tolerance is strictly positive.
    pub fn is_valid(&self) -> bool {
        [self.rel_gap, self.abs_gap, self.int_tol, self.feas_tol, self.opt_tol]
            .iter()
            .all(|&t| t > 0.0 && t.is_finite())
            && self.threads >= 1
    }
}
