//! Sparse left-looking LU factorization of the simplex basis with
//! threshold partial pivoting, plus product-form eta updates.
//!
//! The basis `B` is factored column by column as `B Q = L U` where the row
//! order is the pivot sequence chosen during elimination. Vectors passed to
//! [`Factor::ftran`] are indexed by row and come back indexed by basis
//! position; [`Factor::btran`] goes the other way.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

const NONE: usize = usize::MAX;
const PIVOT_THRESHOLD: f64 = 0.1;
const ABS_PIVOT_TOL: f64 = 1e-11;

/// Columns that could not be pivoted and rows that were left over.
#[derive(Debug, Clone)]
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Factor {
    m: usize,
    l_start: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    u_start: Vec<usize>,
    u_idx: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    pivot_row: Vec<usize>,
    col_pos: Vec<usize>,
    etas: Vec<Eta>,
    eta_nnz: usize,
}

impl Factor {
    /// Factors the basis whose column at position `p` is `column(p)`.
    pub fn factorize<'a, F>(m: usize, column: F) -> Result<Factor, Singular>
    where
        F: Fn(usize) -> &'a [(usize, f64)],
    {
        let mut row_count = vec![0usize; m];
        let mut order: Vec<usize> = (0..m).collect();
        for p in 0..m {
            for &(i, _) in column(p) {
                row_count[i] += 1;
            }
        }
        order.sort_by_key(|&p| (column(p).len(), p));

        let mut f = Factor {
            m,
            l_start: Vec::with_capacity(m + 1),
            u_start: Vec::with_capacity(m + 1),
            u_diag: Vec::with_capacity(m),
            pivot_row: Vec::with_capacity(m),
            col_pos: Vec::with_capacity(m),
            ..Default::default()
        };
        f.l_start.push(0);
        f.u_start.push(0);

        let mut row_step = vec![NONE; m];
        let mut x = vec![0.0f64; m];
        let mut mark = vec![false; m];
        let mut queued = vec![false; m];
        let mut nz: Vec<usize> = Vec::new();
        let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
        let mut bad_positions = Vec::new();

        for &p in &order {
            nz.clear();
            for &(i, v) in column(p) {
                if !mark[i] {
                    mark[i] = true;
                    nz.push(i);
                }
                x[i] += v;
            }
            for &i in &nz {
                let s = row_step[i];
                if s != NONE && !queued[i] {
                    queued[i] = true;
                    heap.push(Reverse(s));
                }
            }
            while let Some(Reverse(s)) = heap.pop() {
                let r = f.pivot_row[s];
                queued[r] = false;
                let v = x[r];
                if v == 0.0 {
                    continue;
                }
                for k in f.l_start[s]..f.l_start[s + 1] {
                    let i = f.l_idx[k];
                    if !mark[i] {
                        mark[i] = true;
                        nz.push(i);
                    }
                    x[i] -= f.l_val[k] * v;
                    let si = row_step[i];
                    if si != NONE && !queued[i] {
                        queued[i] = true;
                        heap.push(Reverse(si));
                    }
                }
            }

            let mut max_abs = 0.0f64;
            for &i in &nz {
                if row_step[i] == NONE {
                    max_abs = max_abs.max(x[i].abs());
                }
            }
            let mut pivot = NONE;
            if max_abs > ABS_PIVOT_TOL {
                let mut best = (usize::MAX, usize::MAX);
                for &i in &nz {
                    if row_step[i] == NONE && x[i].abs() >= PIVOT_THRESHOLD * max_abs {
                        let key = (row_count[i], i);
                        if key < best {
                            best = key;
                            pivot = i;
                        }
                    }
                }
            }

            if pivot == NONE {
                bad_positions.push(p);
            } else {
                let step = f.pivot_row.len();
                let d = x[pivot];
                nz.sort_unstable();
                for &i in &nz {
                    let v = x[i];
                    if v == 0.0 || i == pivot {
                        continue;
                    }
                    let s = row_step[i];
                    if s != NONE {
                        f.u_idx.push(s);
                        f.u_val.push(v);
                    } else if v.abs() > 1e-14 {
                        f.l_idx.push(i);
                        f.l_val.push(v / d);
                    }
                }
                f.u_start.push(f.u_idx.len());
                f.l_start.push(f.l_idx.len());
                f.u_diag.push(d);
                f.pivot_row.push(pivot);
                f.col_pos.push(p);
                row_step[pivot] = step;
            }

            for &i in &nz {
                x[i] = 0.0;
                mark[i] = false;
            }
        }

        if bad_positions.is_empty() {
            Ok(f)
        } else {
            let rows = (0..m).filter(|&i| row_step[i] == NONE).collect();
            Err(Singular {
                positions: bad_positions,
                rows,
            })
        }
    }

    pub fn num_etas(&self) -> usize {
        self.etas.len()
    }

    pub fn eta_nnz(&self) -> usize {
        self.eta_nnz
    }

    /// Solves `B z = b`. `b` is row-indexed and is consumed as scratch; the
    /// result is indexed by basis position.
    pub fn ftran(&self, b: &mut [f64], out: &mut [f64]) {
        let m = self.m;
        for s in 0..m {
            let v = b[self.pivot_row[s]];
            if v == 0.0 {
                continue;
            }
            for k in self.l_start[s]..self.l_start[s + 1] {
                b[self.l_idx[k]] -= self.l_val[k] * v;
            }
        }
        for s in (0..m).rev() {
            let r = self.pivot_row[s];
            let v = b[r];
            if v == 0.0 {
                out[self.col_pos[s]] = 0.0;
                continue;
            }
            let v = v / self.u_diag[s];
            out[self.col_pos[s]] = v;
            for k in self.u_start[s]..self.u_start[s + 1] {
                b[self.pivot_row[self.u_idx[k]]] -= self.u_val[k] * v;
            }
        }
        for eta in &self.etas {
            let zr = out[eta.pos];
            if zr == 0.0 {
                continue;
            }
            let zr = zr / eta.pivot;
            out[eta.pos] = zr;
            for &(i, a) in &eta.entries {
                out[i] -= a * zr;
            }
        }
    }

    /// Solves `B^T y = c`. `c` is position-indexed and is consumed as
    /// scratch; the result is indexed by row.
    pub fn btran(&self, c: &mut [f64], out: &mut [f64]) {
        let m = self.m;
        for eta in self.etas.iter().rev() {
            let mut v = c[eta.pos];
            for &(i, a) in &eta.entries {
                v -= a * c[i];
            }
            c[eta.pos] = v / eta.pivot;
        }
        // U^T v = c in step coordinates, written straight into row slots.
        for s in 0..m {
            let mut v = c[self.col_pos[s]];
            for k in self.u_start[s]..self.u_start[s + 1] {
                v -= self.u_val[k] * out[self.pivot_row[self.u_idx[k]]];
            }
            out[self.pivot_row[s]] = v / self.u_diag[s];
        }
        for s in (0..m).rev() {
            let mut acc = 0.0;
            for k in self.l_start[s]..self.l_start[s + 1] {
                acc += self.l_val[k] * out[self.l_idx[k]];
            }
            if acc != 0.0 {
                out[self.pivot_row[s]] -= acc;
            }
        }
    }

    /// Records the replacement of the basis column at `pos` by a column
    /// whose FTRAN image is `alpha`.
    pub fn push_eta(&mut self, pos: usize, alpha: &[f64]) {
        let entries: Vec<(usize, f64)> = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != pos && a.abs() > 1e-14)
            .map(|(i, &a)| (i, a))
            .collect();
        self.eta_nnz += entries.len();
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            entries,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(cols: &[Vec<(usize, f64)>], z: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (p, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                out[i] += v * z[p];
            }
        }
        out
    }

    #[test]
    fn solves_small_system_both_ways() {
        let cols = vec![
            vec![(0, 2.0), (2, 1.0)],
            vec![(1, -1.0)],
            vec![(0, 1.0), (1, 3.0), (2, 4.0)],
        ];
        let f = Factor::factorize(3, |p| cols[p].as_slice()).unwrap();
        let b = [1.0, 2.0, 3.0];
        let mut scratch = b.to_vec();
        let mut z = vec![0.0; 3];
        f.ftran(&mut scratch, &mut z);
        let back = dense_mul(&cols, &z, 3);
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
        // B^T y = c  <=>  col_p . y = c_p
        let c = [1.0, -1.0, 0.5];
        let mut scratch = c.to_vec();
        let mut y = vec![0.0; 3];
        f.btran(&mut scratch, &mut y);
        for p in 0..3 {
            let dot: f64 = cols[p].iter().map(|&(i, v)| v * y[i]).sum();
            assert!((dot - c[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_update_matches_refactor() {
        let mut cols = vec![
            vec![(0, 1.0)],
            vec![(1, 1.0)],
            vec![(2, 1.0)],
        ];
        let mut f = Factor::factorize(3, |p| cols[p].as_slice()).unwrap();
        let entering = vec![(0, 1.0), (1, 2.0), (2, -1.0)];
        let mut scratch = vec![1.0, 2.0, -1.0];
        let mut alpha = vec![0.0; 3];
        f.ftran(&mut scratch, &mut alpha);
        f.push_eta(1, &alpha);
        cols[1] = entering;
        let b = [0.3, -0.7, 2.0];
        let mut scratch = b.to_vec();
        let mut z = vec![0.0; 3];
        f.ftran(&mut scratch, &mut z);
        let back = dense_mul(&cols, &z, 3);
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
        let c = [1.0, 2.0, 3.0];
        let mut scratch = c.to_vec();
        let mut y = vec![0.0; 3];
        f.btran(&mut scratch, &mut y);
        for p in 0..3 {
            let dot: f64 = cols[p].iter().map(|&(i, v)| v * y[i]).sum();
            assert!((dot - c[p]).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_singular_columns() {
        let cols = vec![vec![(0, 1.0)], vec![(0, 2.0)], vec![(2, 1.0)]];
        let err = Factor::factorize(3, |p| cols[p].as_slice()).unwrap_err();
        assert_eq!(err.positions.len(), 1);
        assert_eq!(err.rows, vec![1]);
    }
}
