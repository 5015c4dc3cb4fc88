use std::fmt;

/// Constraint family a row belongs to. Equations with two one-sided rows
/// (Eq5) get one variant per side; the post-contingency unserved-demand
/// bound belongs to the Eq22 family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EqId {
    Eq2,
    Eq4,
    Eq5Min,
    Eq5Max,
    Eq6,
    Eq7,
    Eq8,
    Eq9,
    Eq10,
    Eq13,
    Eq14,
    Eq16,
    Eq17,
    Eq18,
    Eq19,
    Eq21,
    Eq22,
    Eq22Unserved,
    Eq25,
    Eq28,
    Eq29,
    Eq30,
    Eq31,
    Eq34,
    Eq35,
    Eq37,
}

impl EqId {
    pub const ALL: [EqId; 26] = [
        EqId::Eq2,
        EqId::Eq4,
        EqId::Eq5Min,
        EqId::Eq5Max,
        EqId::Eq6,
        EqId::Eq7,
        EqId::Eq8,
        EqId::Eq9,
        EqId::Eq10,
        EqId::Eq13,
        EqId::Eq14,
        EqId::Eq16,
        EqId::Eq17,
        EqId::Eq18,
        EqId::Eq19,
        EqId::Eq21,
        EqId::Eq22,
        EqId::Eq22Unserved,
        EqId::Eq25,
        EqId::Eq28,
        EqId::Eq29,
        EqId::Eq30,
        EqId::Eq31,
        EqId::Eq34,
        EqId::Eq35,
        EqId::Eq37,
    ];

    /// Equation label, e.g. `"Eq5"` for both sides of the generation limits.
    pub fn equation(&self) -> &'static str {
        match self {
            EqId::Eq2 => "Eq2",
            EqId::Eq4 => "Eq4",
            EqId::Eq5Min | EqId::Eq5Max => "Eq5",
            EqId::Eq6 => "Eq6",
            EqId::Eq7 => "Eq7",
            EqId::Eq8 => "Eq8",
            EqId::Eq9 => "Eq9",
            EqId::Eq10 => "Eq10",
            EqId::Eq13 => "Eq13",
            EqId::Eq14 => "Eq14",
            EqId::Eq16 => "Eq16",
            EqId::Eq17 => "Eq17",
            EqId::Eq18 => "Eq18",
            EqId::Eq19 => "Eq19",
            EqId::Eq21 => "Eq21",
            EqId::Eq22 | EqId::Eq22Unserved => "Eq22",
            EqId::Eq25 => "Eq25",
            EqId::Eq28 => "Eq28",
            EqId::Eq29 => "Eq29",
            EqId::Eq30 => "Eq30",
            EqId::Eq31 => "Eq31",
            EqId::Eq34 => "Eq34",
            EqId::Eq35 => "Eq35",
            EqId::Eq37 => "Eq37",
        }
    }

    /// Unique row-name prefix.
    pub fn code(&self) -> &'static str {
        match self {
            EqId::Eq2 => "EQ2",
            EqId::Eq4 => "EQ4",
            EqId::Eq5Min => "EQ5MIN",
            EqId::Eq5Max => "EQ5MAX",
            EqId::Eq6 => "EQ6",
            EqId::Eq7 => "EQ7",
            EqId::Eq8 => "EQ8",
            EqId::Eq9 => "EQ9",
            EqId::Eq10 => "EQ10",
            EqId::Eq13 => "EQ13",
            EqId::Eq14 => "EQ14",
            EqId::Eq16 => "EQ16",
            EqId::Eq17 => "EQ17",
            EqId::Eq18 => "EQ18",
            EqId::Eq19 => "EQ19",
            EqId::Eq21 => "EQ21",
            EqId::Eq22 => "EQ22",
            EqId::Eq22Unserved => "EQ22UD",
            EqId::Eq25 => "EQ25",
            EqId::Eq28 => "EQ28",
            EqId::Eq29 => "EQ29",
            EqId::Eq30 => "EQ30",
            EqId::Eq31 => "EQ31",
            EqId::Eq34 => "EQ34",
            EqId::Eq35 => "EQ35",
            EqId::Eq37 => "EQ37",
        }
    }
}

/// Equation family and 1-based index tuple that generated a row. For SOC
/// rows `k = 0` is the pre-contingency trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintTag {
    pub eq: EqId,
    pub index: Vec<(&'static str, usize)>,
}

impl ConstraintTag {
    /// Row name used in the model and in MPS exports, e.g. `EQ2_n3_t7`.
    pub fn row_name(&self) -> String {
        let mut s = self.eq.code().to_string();
        for (k, v) in &self.index {
            s.push('_');
            s.push_str(k);
            s.push_str(&v.to_string());
        }
        s
    }

    /// Value of one index, if present.
    pub fn get(&self, key: &str) -> Option<usize> {
        self.index.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }
}

/// `Eq18 g=2 t=5 k=1`
impl fmt::Display for ConstraintTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.eq.equation())?;
        match self.eq {
            EqId::Eq5Min => f.write_str(" (min)")?,
            EqId::Eq5Max => f.write_str(" (max)")?,
            EqId::Eq22Unserved => f.write_str(" (unserved bound)")?,
            _ => {}
        }
        for (k, v) in &self.index {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}
