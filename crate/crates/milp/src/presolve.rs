//! Conversion of a [`MilpModel`] into the internal computational form:
//! fixed columns substituted out, empty rows dropped, and powers-of-two
//! equilibration applied to rows and columns.

use crate::model::MilpModel;

/// Presolved, scaled LP in column-major form. Row `i` carries a logical
/// variable equal to its activity, bounded by `row_lower..=row_upper`.
#[derive(Debug, Clone)]
pub(crate) struct ReducedLp {
    pub n: usize,
    pub m: usize,
    pub col_start: Vec<usize>,
    /// (row, value) pairs, column after column.
    pub nz: Vec<(usize, f64)>,
    pub cost: Vec<f64>,
    pub col_lower: Vec<f64>,
    pub col_upper: Vec<f64>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
    /// Original index of each kept column.
    pub col_map: Vec<usize>,
    /// Original index of each kept row.
    pub row_map: Vec<usize>,
    pub col_scale: Vec<f64>,
    pub row_scale: Vec<f64>,
}

/// Why presolve alone decided the model is infeasible.
#[derive(Debug, Clone)]
pub(crate) struct PresolveInfeasible {
    /// Original row whose remaining activity (zero) lies outside its bounds.
    pub row: usize,
    /// +1 when the constant activity exceeds the upper bound, -1 when below.
    pub side: f64,
}

fn pow2_round(v: f64) -> f64 {
    if v <= 0.0 || !v.is_finite() {
        1.0
    } else {
        2f64.powi(v.log2().round() as i32)
    }
}

pub(crate) fn reduce(model: &MilpModel, presolve: bool, scaling: bool, tol: f64) -> Result<ReducedLp, PresolveInfeasible> {
    let cols = model.columns();
    let rows = model.rows();
    let fixed: Vec<bool> = cols
        .iter()
        .map(|c| presolve && c.lower == c.upper)
        .collect();

    let mut col_new = vec![usize::MAX; cols.len()];
    let mut col_map = Vec::new();
    for (j, _) in cols.iter().enumerate() {
        if !fixed[j] {
            col_new[j] = col_map.len();
            col_map.push(j);
        }
    }

    // Row entries of kept columns, with fixed columns folded into the bounds.
    let mut row_map = Vec::new();
    let mut row_lower = Vec::new();
    let mut row_upper = Vec::new();
    let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); col_map.len()];
    for (i, r) in rows.iter().enumerate() {
        let mut constant = 0.0;
        let mut kept: Vec<(usize, f64)> = Vec::with_capacity(r.coeffs.len());
        for &(j, a) in &r.coeffs {
            if a == 0.0 {
                continue;
            }
            if fixed[j] {
                constant += a * cols[j].lower;
            } else {
                kept.push((col_new[j], a));
            }
        }
        kept.sort_by_key(|e| e.0);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(kept.len());
        for (j, a) in kept {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|e| e.1 != 0.0);
        let (lo, hi) = r.activity_bounds();
        let (lo, hi) = (lo - constant, hi - constant);
        if merged.is_empty() && presolve {
            let scale = 1.0 + r.rhs.abs();
            if lo > tol * scale {
                return Err(PresolveInfeasible { row: i, side: -1.0 });
            }
            if hi < -tol * scale {
                return Err(PresolveInfeasible { row: i, side: 1.0 });
            }
            continue;
        }
        let new_i = row_map.len();
        row_map.push(i);
        row_lower.push(lo);
        row_upper.push(hi);
        for (j, a) in merged {
            entries[j].push((new_i, a));
        }
    }

    let n = col_map.len();
    let m = row_map.len();
    let mut col_scale = vec![1.0; n];
    let mut row_scale = vec![1.0; m];
    if scaling {
        // A few passes of geometric-mean scaling, rounded to powers of two
        // so scaling and unscaling are exact.
        for _ in 0..4 {
            let mut rmin = vec![f64::INFINITY; m];
            let mut rmax = vec![0.0f64; m];
            for (j, col) in entries.iter().enumerate() {
                for &(i, a) in col {
                    let v = (a * col_scale[j]).abs();
                    rmin[i] = rmin[i].min(v);
                    rmax[i] = rmax[i].max(v);
                }
            }
            for i in 0..m {
                if rmax[i] > 0.0 {
                    row_scale[i] = pow2_round(1.0 / (rmin[i] * rmax[i]).sqrt());
                }
            }
            for (j, col) in entries.iter().enumerate() {
                let mut cmin = f64::INFINITY;
                let mut cmax = 0.0f64;
                for &(i, a) in col {
                    let v = (a * row_scale[i]).abs();
                    cmin = cmin.min(v);
                    cmax = cmax.max(v);
                }
                if cmax > 0.0 {
                    col_scale[j] = pow2_round(1.0 / (cmin * cmax).sqrt());
                }
            }
        }
    }

    let mut col_start = Vec::with_capacity(n + 1);
    let mut nz = Vec::new();
    col_start.push(0);
    for (j, col) in entries.iter().enumerate() {
        for &(i, a) in col {
            nz.push((i, a * row_scale[i] * col_scale[j]));
        }
        col_start.push(nz.len());
    }
    let cost = col_map
        .iter()
        .enumerate()
        .map(|(j, &o)| cols[o].cost * col_scale[j])
        .collect();
    let col_lower = col_map
        .iter()
        .enumerate()
        .map(|(j, &o)| cols[o].lower / col_scale[j])
        .collect();
    let col_upper = col_map
        .iter()
        .enumerate()
        .map(|(j, &o)| cols[o].upper / col_scale[j])
        .collect();
    let row_lower = row_lower.iter().zip(&row_scale).map(|(v, s)| v * s).collect();
    let row_upper = row_upper.iter().zip(&row_scale).map(|(v, s)| v * s).collect();

    Ok(ReducedLp {
        n,
        m,
        col_start,
        nz,
        cost,
        col_lower,
        col_upper,
        row_lower,
        row_upper,
        col_map,
        row_map,
        col_scale,
        row_scale,
    })
}
