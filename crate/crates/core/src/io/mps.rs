//! Free-format MPS.
//!
//! The writer emits `NAME`, `ROWS`, `COLUMNS`, `RHS`, `BOUNDS` and `ENDATA`.
//! Rows are never ranged, so no `RANGES` section is needed. Binaries are
//! declared with `BV` bounds; the objective row is `OBJ` and the sense is
//! minimization.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gridsched_milp::{MilpModel, Sense};

use super::IoError;

const OBJ: &str = "OBJ";

/// The model as free-format MPS text.
///
/// # Panics
/// If two rows or two columns share a name.
pub fn to_mps_string(model: &MilpModel, name: &str) -> String {
    let rows = model.rows();
    let cols = model.columns();
    let row_names: HashSet<&str> = rows.iter().map(|r| r.name.as_str()).collect();
    let col_names: HashSet<&str> = cols.iter().map(|c| c.name.as_str()).collect();
    assert!(row_names.len() == rows.len() && !row_names.contains(OBJ), "row name collision");
    assert_eq!(col_names.len(), cols.len(), "column name collision");

    // Column-major copy of the coefficients, in row order within a column.
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cols.len()];
    for (i, row) in rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            if a != 0.0 {
                by_col[j].push((i, a));
            }
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "NAME {name}");
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N {OBJ}");
    for row in rows {
        let sense = match row.sense {
            Sense::Le => "L",
            Sense::Eq => "E",
            Sense::Ge => "G",
        };
        let _ = writeln!(out, " {sense} {}", row.name);
    }
    out.push_str("COLUMNS\n");
    for (j, col) in cols.iter().enumerate() {
        if col.cost != 0.0 {
            let _ = writeln!(out, "    {} {OBJ} {}", col.name, col.cost);
        }
        for &(i, a) in &by_col[j] {
            let _ = writeln!(out, "    {} {} {}", col.name, rows[i].name, a);
        }
        if col.cost == 0.0 && by_col[j].is_empty() {
            // Keep the column declared.
            let _ = writeln!(out, "    {} {OBJ} 0", col.name);
        }
    }
    out.push_str("RHS\n");
    for row in rows {
        if row.rhs != 0.0 {
            let _ = writeln!(out, "    RHS {} {}", row.name, row.rhs);
        }
    }
    out.push_str("BOUNDS\n");
    for col in cols {
        let (lo, hi) = (col.lower, col.upper);
        let n = &col.name;
        if col.binary {
            // BV sets [0, 1]; tighter bounds follow it.
            let _ = writeln!(out, " BV BND {n}");
            if lo != 0.0 {
                let _ = writeln!(out, " LO BND {n} {lo}");
            }
            if hi != 1.0 {
                let _ = writeln!(out, " UP BND {n} {hi}");
            }
        } else if lo == hi {
            let _ = writeln!(out, " FX BND {n} {lo}");
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " FR BND {n}");
        } else {
            if lo == f64::NEG_INFINITY {
                let _ = writeln!(out, " MI BND {n}");
            } else if lo != 0.0 {
                let _ = writeln!(out, " LO BND {n} {lo}");
            }
            if hi != f64::INFINITY {
                let _ = writeln!(out, " UP BND {n} {hi}");
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

pub fn export_mps(model: &MilpModel, name: &str, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    fs::write(path, to_mps_string(model, name)).map_err(|e| IoError::io(path, e))
}

#[derive(PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
}

/// Minimal reader for the subset written by [`to_mps_string`] (plus `MARKER`
/// lines and `RANGES`-free files from other tools). Returns the model and
/// its name.
pub fn parse_mps(text: &str) -> Result<(MilpModel, String), IoError> {
    let err = |line: usize, message: String| IoError::Mps { line, message };
    let mut name = String::new();
    let mut section = Section::None;
    let mut obj_name = String::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<(String, Sense, Vec<(usize, f64)>, f64)> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut cols: Vec<(String, f64, f64, f64, bool)> = Vec::new();
    let mut integer_block = false;

    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') {
            section = match fields[0] {
                "NAME" => {
                    name = fields.get(1).unwrap_or(&"").to_string();
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => break,
                other => return Err(err(ln, format!("unsupported section {other}"))),
            };
            continue;
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(ln, format!("bad number {s:?}")));
        match section {
            Section::Rows => {
                let [kind, row] = fields[..] else {
                    return Err(err(ln, "expected '<sense> <name>'".into()));
                };
                let sense = match kind {
                    "N" => {
                        if obj_name.is_empty() {
                            obj_name = row.to_string();
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "E" => Sense::Eq,
                    "G" => Sense::Ge,
                    _ => return Err(err(ln, format!("unknown row type {kind}"))),
                };
                row_index.insert(row.to_string(), rows.len());
                rows.push((row.to_string(), sense, Vec::new(), 0.0));
            }
            Section::Columns => {
                if fields.get(1) == Some(&"'MARKER'") {
                    integer_block = fields.get(2) == Some(&"'INTORG'");
                    continue;
                }
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(err(ln, "expected '<column> <row> <value> ...'".into()));
                }
                let j = *col_index.entry(fields[0].to_string()).or_insert_with(|| {
                    cols.push((fields[0].to_string(), 0.0, f64::INFINITY, 0.0, integer_block));
                    if integer_block {
                        cols.last_mut().unwrap().2 = 1.0;
                    }
                    cols.len() - 1
                });
                for pair in fields[1..].chunks(2) {
                    let value = num(pair[1])?;
                    if pair[0] == obj_name {
                        cols[j].3 = value;
                    } else {
                        let i = *row_index.get(pair[0]).ok_or_else(|| err(ln, format!("unknown row {}", pair[0])))?;
                        rows[i].2.push((j, value));
                    }
                }
            }
            Section::Rhs => {
                if fields.len() < 3 || fields.len() % 2 == 0 {
                    return Err(err(ln, "expected '<set> <row> <value> ...'".into()));
                }
                for pair in fields[1..].chunks(2) {
                    if pair[0] == obj_name {
                        continue;
                    }
                    let i = *row_index.get(pair[0]).ok_or_else(|| err(ln, format!("unknown row {}", pair[0])))?;
                    rows[i].3 = num(pair[1])?;
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(err(ln, "expected '<type> <set> <column> [value]'".into()));
                }
                let j = *col_index.get(fields[2]).ok_or_else(|| err(ln, format!("unknown column {}", fields[2])))?;
                let value = || fields.get(3).ok_or_else(|| err(ln, "missing bound value".into())).and_then(|s| num(s));
                let col = &mut cols[j];
                match fields[0] {
                    "UP" => col.2 = value()?,
                    "LO" => col.1 = value()?,
                    "FX" => {
                        let v = value()?;
                        col.1 = v;
                        col.2 = v;
                    }
                    "FR" => {
                        col.1 = f64::NEG_INFINITY;
                        col.2 = f64::INFINITY;
                    }
                    "MI" => col.1 = f64::NEG_INFINITY,
                    "PL" => col.2 = f64::INFINITY,
                    "BV" => {
                        col.1 = 0.0;
                        col.2 = 1.0;
                        col.4 = true;
                    }
                    other => return Err(err(ln, format!("unsupported bound type {other}"))),
                }
            }
            Section::None => return Err(err(ln, "data line outside a section".into())),
        }
    }

    let mut model = MilpModel::new();
    for (n, lo, hi, cost, binary) in cols {
        model.add_column(n, lo, hi, cost, binary);
    }
    for (n, sense, coeffs, rhs) in rows {
        model.add_row(n, coeffs, sense, rhs);
    }
    Ok((model, name))
}
