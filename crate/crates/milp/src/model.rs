//! Sparse MILP model: bounded columns, linear rows, minimization objective.

use std::fmt;

use crate::error::ModelError;

/// Row sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
    pub binary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    /// Row activity for a full column vector.
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `activity` violates the row, zero when satisfied.
    pub fn violation(&self, activity: f64) -> f64 {
        match self.sense {
            Sense::Le => (activity - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - activity).max(0.0),
            Sense::Eq => (activity - self.rhs).abs(),
        }
    }

    /// Lower and upper bound on the row activity implied by the sense.
    pub fn activity_bounds(&self) -> (f64, f64) {
        match self.sense {
            Sense::Le => (f64::NEG_INFINITY, self.rhs),
            Sense::Ge => (self.rhs, f64::INFINITY),
            Sense::Eq => (self.rhs, self.rhs),
        }
    }
}

/// A minimization MILP in row form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    columns: Vec<Column>,
    rows: Vec<Row>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_column(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        cost: f64,
        binary: bool,
    ) -> usize {
        self.columns.push(Column {
            name: name.into(),
            lower,
            upper,
            cost,
            binary,
        });
        self.columns.len() - 1
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        self.rows.push(Row {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        });
        self.rows.len() - 1
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn column_mut(&mut self, j: usize) -> &mut Column {
        &mut self.columns[j]
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.columns[j].lower = lower;
        self.columns[j].upper = upper;
    }

    pub fn set_cost(&mut self, j: usize, cost: f64) {
        self.columns[j].cost = cost;
    }

    /// Indices of the binary columns, ascending.
    pub fn binary_columns(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&j| self.columns[j].binary)
            .collect()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.columns.iter().zip(x).map(|(c, v)| c.cost * v).sum()
    }

    /// Largest bound or row violation of `x`, unscaled.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = self
            .columns
            .iter()
            .zip(x)
            .map(|(c, &v)| (c.lower - v).max(v - c.upper).max(0.0));
        let rows = self.rows.iter().map(|r| r.violation(r.activity(x)));
        bounds.chain(rows).fold(0.0, f64::max)
    }

    /// Checks the structural invariants: finite coefficients, consistent
    /// bounds, binary columns inside [0, 1] and valid column references.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (j, c) in self.columns.iter().enumerate() {
            if c.cost.is_nan() || c.cost.is_infinite() {
                return Err(ModelError::NonFinite(format!("cost of column {}", c.name)));
            }
            if c.lower.is_nan() || c.upper.is_nan() || c.lower == f64::INFINITY || c.upper == f64::NEG_INFINITY {
                return Err(ModelError::NonFinite(format!("bounds of column {}", c.name)));
            }
            if c.lower > c.upper {
                return Err(ModelError::InvertedBounds {
                    column: j,
                    lower: c.lower,
                    upper: c.upper,
                });
            }
            if c.binary && (c.lower < 0.0 || c.upper > 1.0) {
                return Err(ModelError::BinaryBounds(j));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite() {
                return Err(ModelError::NonFinite(format!("rhs of row {}", r.name)));
            }
            for &(j, a) in &r.coeffs {
                if j >= self.columns.len() {
                    return Err(ModelError::BadColumn { row: i, column: j });
                }
                if !a.is_finite() {
                    return Err(ModelError::NonFinite(format!("coefficient in row {}", r.name)));
                }
            }
        }
        Ok(())
    }
}

/// Returns a copy of `model` with the listed binary columns pinned to the
/// given values. The original model is untouched.
pub fn fix_binaries(model: &MilpModel, assignment: &[(usize, bool)]) -> Result<MilpModel, ModelError> {
    let mut out = model.clone();
    for &(j, value) in assignment {
        let col = out.columns.get(j).ok_or(ModelError::BadColumn { row: usize::MAX, column: j })?;
        if !col.binary {
            return Err(ModelError::NotBinary(j));
        }
        let v = if value { 1.0 } else { 0.0 };
        out.set_bounds(j, v, v);
    }
    Ok(out)
}
