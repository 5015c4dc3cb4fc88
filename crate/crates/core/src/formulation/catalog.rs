use std::collections::HashMap;
use std::fmt;

/// One decision variable of the scheduling model. Indices are 0-based
/// positions in the instance: `g` over all units (conventional first), `n`
/// over buses, `l` over lines, `d` over consumers, `v` over PEV groups, `t`
/// over periods and `k` over contingencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// `p_gt`
    P { g: usize, t: usize },
    /// `s_gt`, renewable spillage.
    Spill { g: usize, t: usize },
    /// `u_gt`
    U { g: usize, t: usize },
    /// `c^SU_gt`
    StartupCost { g: usize, t: usize },
    /// `c^SD_gt`
    ShutdownCost { g: usize, t: usize },
    /// `p^L_lt`
    Flow { l: usize, t: usize },
    /// `θ_nt`
    Angle { n: usize, t: usize },
    /// `p^UD_dt`
    Unserved { d: usize, t: usize },
    /// `p^PR_gtk`
    Pfr { g: usize, t: usize, k: usize },
    /// `p^UD,PR_dtk`
    UnservedPfr { d: usize, t: usize, k: usize },
    /// `Δf_tk`
    FreqDev { t: usize, k: usize },
    /// `e^C_vnt`
    Charge { v: usize, n: usize, t: usize },
    /// `e^D_vnt`
    Discharge { v: usize, n: usize, t: usize },
    /// Pre-contingency state of charge.
    SocPre { v: usize, n: usize, t: usize },
    /// `e^V_vntk`
    Soc { v: usize, n: usize, t: usize, k: usize },
    /// `e^C,PR_vntk`
    ChargePfrEnergy { v: usize, n: usize, t: usize, k: usize },
    /// `e^D,PR_vntk`
    DischargePfrEnergy { v: usize, n: usize, t: usize, k: usize },
    /// `p^V,PRC_vntk`
    PevPfrCharge { v: usize, n: usize, t: usize, k: usize },
    /// `p^V,PRD_vntk`
    PevPfrDischarge { v: usize, n: usize, t: usize, k: usize },
    /// `p^V,PR_vntk`
    PevPfr { v: usize, n: usize, t: usize, k: usize },
    /// `c^V,PR_vnt`, scheduled PEV reserve capacity.
    PevCapacity { v: usize, n: usize, t: usize },
}

impl Var {
    /// Symbol prefix used in column names.
    pub fn symbol(&self) -> &'static str {
        match self {
            Var::P { .. } => "P",
            Var::Spill { .. } => "S",
            Var::U { .. } => "U",
            Var::StartupCost { .. } => "CSU",
            Var::ShutdownCost { .. } => "CSD",
            Var::Flow { .. } => "PL",
            Var::Angle { .. } => "TH",
            Var::Unserved { .. } => "PUD",
            Var::Pfr { .. } => "PPR",
            Var::UnservedPfr { .. } => "PUDPR",
            Var::FreqDev { .. } => "DF",
            Var::Charge { .. } => "EC",
            Var::Discharge { .. } => "ED",
            Var::SocPre { .. } => "EV0",
            Var::Soc { .. } => "EV",
            Var::ChargePfrEnergy { .. } => "ECPR",
            Var::DischargePfrEnergy { .. } => "EDPR",
            Var::PevPfrCharge { .. } => "PVPRC",
            Var::PevPfrDischarge { .. } => "PVPRD",
            Var::PevPfr { .. } => "PVPR",
            Var::PevCapacity { .. } => "CVPR",
        }
    }

    /// Whether the variable belongs to a post-contingency state.
    pub fn is_contingency(&self) -> bool {
        matches!(
            self,
            Var::Pfr { .. }
                | Var::UnservedPfr { .. }
                | Var::FreqDev { .. }
                | Var::Soc { .. }
                | Var::ChargePfrEnergy { .. }
                | Var::DischargePfrEnergy { .. }
                | Var::PevPfrCharge { .. }
                | Var::PevPfrDischarge { .. }
                | Var::PevPfr { .. }
        )
    }
}

/// Column name: symbol followed by 1-based indices, e.g. `P_g1_t5`.
impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.symbol();
        match *self {
            Var::P { g, t }
            | Var::Spill { g, t }
            | Var::U { g, t }
            | Var::StartupCost { g, t }
            | Var::ShutdownCost { g, t } => write!(f, "{s}_g{}_t{}", g + 1, t + 1),
            Var::Flow { l, t } => write!(f, "{s}_l{}_t{}", l + 1, t + 1),
            Var::Angle { n, t } => write!(f, "{s}_n{}_t{}", n + 1, t + 1),
            Var::Unserved { d, t } => write!(f, "{s}_d{}_t{}", d + 1, t + 1),
            Var::Pfr { g, t, k } => write!(f, "{s}_g{}_t{}_k{}", g + 1, t + 1, k + 1),
            Var::UnservedPfr { d, t, k } => write!(f, "{s}_d{}_t{}_k{}", d + 1, t + 1, k + 1),
            Var::FreqDev { t, k } => write!(f, "{s}_t{}_k{}", t + 1, k + 1),
            Var::Charge { v, n, t } | Var::Discharge { v, n, t } | Var::SocPre { v, n, t } | Var::PevCapacity { v, n, t } => {
                write!(f, "{s}_v{}_n{}_t{}", v + 1, n + 1, t + 1)
            }
            Var::Soc { v, n, t, k }
            | Var::ChargePfrEnergy { v, n, t, k }
            | Var::DischargePfrEnergy { v, n, t, k }
            | Var::PevPfrCharge { v, n, t, k }
            | Var::PevPfrDischarge { v, n, t, k }
            | Var::PevPfr { v, n, t, k } => write!(f, "{s}_v{}_n{}_t{}_k{}", v + 1, n + 1, t + 1, k + 1),
        }
    }
}

/// Bijection between model variables and MILP column indices.
#[derive(Debug, Clone, Default)]
pub struct VariableCatalog {
    vars: Vec<Var>,
    index: HashMap<Var, usize>,
}

impl VariableCatalog {
    pub(crate) fn insert(&mut self, var: Var) -> usize {
        let col = self.vars.len();
        let previous = self.index.insert(var, col);
        assert!(previous.is_none(), "variable {var} registered twice");
        self.vars.push(var);
        col
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn col(&self, var: Var) -> Option<usize> {
        self.index.get(&var).copied()
    }

    pub fn var(&self, col: usize) -> Var {
        self.vars[col]
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    /// Value of `var` in `x`, or 0 for variables the case does not create.
    pub fn value(&self, x: &[f64], var: Var) -> f64 {
        self.col(var).map_or(0.0, |c| x[c])
    }
}
