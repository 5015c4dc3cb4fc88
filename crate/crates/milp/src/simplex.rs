//! Bounded-variable revised simplex over a [`ReducedLp`].
//!
//! Every row `i` owns a logical variable `r_i = a_i x` with the row bounds,
//! so the constraint matrix is `[A  -I]` with a zero right-hand side and all
//! bound information lives on the variables. Nonbasic variables sit at a
//! bound (or at zero when free). The primal loop handles phase 1 by pricing
//! the sum of infeasibilities of the basic variables; the dual loop is used
//! to reoptimize after bound changes from a dual feasible basis.

use crate::lu::Factor;
use crate::presolve::ReducedLp;

const REFACTOR_EVERY: usize = 100;
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NumericalFailure,
}

/// Outcome of the dual loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DualOutcome {
    Done(Status),
    /// The starting basis was not dual feasible, or the loop stalled.
    NeedPrimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub(crate) enum VarState {
    Basic,
    Lower,
    Upper,
    Free,
}

/// Basis snapshot used to warm start a later solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Basis {
    state: Vec<VarState>,
    head: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct EngineConfig {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub stall_limit: usize,
    pub iteration_limit: usize,
}

pub(crate) struct Engine {
    pub lp: ReducedLp,
    n: usize,
    m: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    pub x: Vec<f64>,
    state: Vec<VarState>,
    head: Vec<usize>,
    pos_of: Vec<usize>,
    logical: Vec<(usize, f64)>,
    factor: Factor,
    cfg: EngineConfig,
    dual_tol: f64,
    pub iterations: usize,
    /// Row multipliers proving infeasibility, row-indexed, scaled space.
    pub farkas: Option<Vec<f64>>,
    /// Improving direction over all variables when unbounded, scaled space.
    pub ray: Option<Vec<f64>>,
    // scratch
    work_m: Vec<f64>,
    work_m2: Vec<f64>,
}

fn nonbasic_state(lower: f64, upper: f64) -> VarState {
    if lower.is_finite() {
        VarState::Lower
    } else if upper.is_finite() {
        VarState::Upper
    } else {
        VarState::Free
    }
}

impl Engine {
    pub fn new(lp: ReducedLp, cfg: EngineConfig) -> Self {
        let n = lp.n;
        let m = lp.m;
        let mut lower = lp.col_lower.clone();
        lower.extend_from_slice(&lp.row_lower);
        let mut upper = lp.col_upper.clone();
        upper.extend_from_slice(&lp.row_upper);
        let mut cost = lp.cost.clone();
        cost.resize(n + m, 0.0);
        let cmax = cost.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let dual_tol = cfg.opt_tol * cmax.max(1.0);
        let logical = (0..m).map(|i| (i, -1.0)).collect();
        let mut state = Vec::with_capacity(n + m);
        for j in 0..n {
            state.push(nonbasic_state(lower[j], upper[j]));
        }
        state.extend(std::iter::repeat(VarState::Basic).take(m));
        let head: Vec<usize> = (n..n + m).collect();
        let mut e = Engine {
            lp,
            n,
            m,
            lower,
            upper,
            cost,
            x: vec![0.0; n + m],
            state,
            head,
            pos_of: vec![usize::MAX; n + m],
            logical,
            factor: Factor::default(),
            cfg,
            dual_tol,
            iterations: 0,
            farkas: None,
            ray: None,
            work_m: vec![0.0; m],
            work_m2: vec![0.0; m],
        };
        e.sync_nonbasic_values();
        e
    }

    fn column(&self, j: usize) -> &[(usize, f64)] {
        if j < self.n {
            &self.lp.nz[self.lp.col_start[j]..self.lp.col_start[j + 1]]
        } else {
            let i = j - self.n;
            &self.logical[i..i + 1]
        }
    }

    fn sync_nonbasic_values(&mut self) {
        for j in 0..self.n + self.m {
            self.x[j] = match self.state[j] {
                VarState::Basic => self.x[j],
                VarState::Lower => self.lower[j],
                VarState::Upper => self.upper[j],
                VarState::Free => 0.0,
            };
        }
    }

    pub fn basis(&self) -> Basis {
        Basis {
            state: self.state.clone(),
            head: self.head.clone(),
        }
    }

    pub fn set_basis(&mut self, basis: &Basis) {
        self.state.clone_from(&basis.state);
        self.head.clone_from(&basis.head);
        // A bound change may have left a nonbasic state pointing at an
        // infinite bound.
        for j in 0..self.n + self.m {
            let s = self.state[j];
            if (s == VarState::Lower && !self.lower[j].is_finite())
                || (s == VarState::Upper && !self.upper[j].is_finite())
            {
                self.state[j] = nonbasic_state(self.lower[j], self.upper[j]);
            }
        }
        self.sync_nonbasic_values();
    }

    /// Sets bounds of structural column `j` (scaled units). Values of
    /// nonbasic variables follow their bound; call [`Engine::reoptimize`]
    /// afterwards.
    pub fn set_col_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        self.lower[j] = lower;
        self.upper[j] = upper;
        match self.state[j] {
            VarState::Basic => {}
            VarState::Lower if lower.is_finite() => self.x[j] = lower,
            VarState::Upper if upper.is_finite() => self.x[j] = upper,
            _ => {
                self.state[j] = nonbasic_state(lower, upper);
                self.x[j] = match self.state[j] {
                    VarState::Lower => lower,
                    VarState::Upper => upper,
                    _ => 0.0,
                };
            }
        }
    }

    fn refactor(&mut self) -> bool {
        for attempt in 0..4 {
            let result = {
                let head = &self.head;
                Factor::factorize(self.m, |p| self.column(head[p]))
            };
            match result {
                Ok(f) => {
                    self.factor = f;
                    for (p, &j) in self.head.iter().enumerate() {
                        self.pos_of[j] = p;
                    }
                    self.compute_basic_values();
                    return true;
                }
                Err(sing) => {
                    if attempt == 3 {
                        return false;
                    }
                    log::debug!("singular basis, replacing {} columns", sing.positions.len());
                    for (&p, &r) in sing.positions.iter().zip(&sing.rows) {
                        let old = self.head[p];
                        let new = self.n + r;
                        self.state[old] = nonbasic_state(self.lower[old], self.upper[old]);
                        self.pos_of[old] = usize::MAX;
                        self.state[new] = VarState::Basic;
                        self.head[p] = new;
                    }
                    self.sync_nonbasic_values();
                }
            }
        }
        false
    }

    fn compute_basic_values(&mut self) {
        let mut rhs = std::mem::take(&mut self.work_m);
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n + self.m {
            if self.state[j] != VarState::Basic {
                let v = self.x[j];
                if v != 0.0 {
                    for &(i, a) in self.column(j) {
                        rhs[i] -= a * v;
                    }
                }
            }
        }
        let mut out = std::mem::take(&mut self.work_m2);
        self.factor.ftran(&mut rhs, &mut out);
        for p in 0..self.m {
            self.x[self.head[p]] = out[p];
        }
        self.work_m = rhs;
        self.work_m2 = out;
    }

    fn ftran_column(&mut self, j: usize, out: &mut [f64]) {
        let mut rhs = std::mem::take(&mut self.work_m);
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for &(i, a) in self.column(j) {
            rhs[i] = a;
        }
        self.factor.ftran(&mut rhs, out);
        self.work_m = rhs;
    }

    fn btran(&mut self, c: &[f64]) -> Vec<f64> {
        let mut scratch = c.to_vec();
        let mut y = vec![0.0; self.m];
        self.factor.btran(&mut scratch, &mut y);
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64], cost: f64) -> f64 {
        if j < self.n {
            let mut d = cost;
            for &(i, a) in self.column(j) {
                d -= a * y[i];
            }
            d
        } else {
            cost + y[j - self.n]
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        (self.lower[j] - v).max(v - self.upper[j]).max(0.0)
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64], leaving_state: VarState) -> bool {
        let p = self.head[r];
        self.state[p] = leaving_state;
        self.pos_of[p] = usize::MAX;
        self.state[q] = VarState::Basic;
        self.head[r] = q;
        self.pos_of[q] = r;
        self.factor.push_eta(r, alpha);
        if self.factor.num_etas() >= REFACTOR_EVERY || self.factor.eta_nnz() > 4 * self.lp.nz.len() + 10 * self.m {
            return self.refactor();
        }
        true
    }

    fn leaving_state(&self, j: usize, at_lower: bool) -> VarState {
        if at_lower {
            VarState::Lower
        } else if self.lower[j] == self.upper[j] {
            VarState::Lower
        } else {
            VarState::Upper
        }
    }

    /// Primal simplex from the current basis. Handles infeasible starts via
    /// a sum-of-infeasibilities phase 1.
    pub fn primal(&mut self) -> Status {
        self.farkas = None;
        self.ray = None;
        if !self.refactor() {
            return Status::NumericalFailure;
        }
        let tol_p = self.cfg.feas_tol;
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut cb = vec![0.0; self.m];
        let mut alpha = vec![0.0; self.m];
        let mut small_pivot_retries = 0;
        let mut fresh = true;
        loop {
            if self.iterations >= self.cfg.iteration_limit {
                return Status::IterationLimit;
            }
            let mut phase1 = false;
            for p in 0..self.m {
                let j = self.head[p];
                let v = self.x[j];
                cb[p] = if v < self.lower[j] - tol_p {
                    phase1 = true;
                    -1.0
                } else if v > self.upper[j] + tol_p {
                    phase1 = true;
                    1.0
                } else {
                    0.0
                };
            }
            if !phase1 {
                for p in 0..self.m {
                    cb[p] = self.cost[self.head[p]];
                }
            }
            let y = self.btran(&cb);

            // Pricing.
            let mut entering = usize::MAX;
            let mut best = 0.0;
            let mut dir = 0.0;
            for j in 0..self.n + self.m {
                let s = self.state[j];
                if s == VarState::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let c = if phase1 { 0.0 } else { self.cost[j] };
                let d = self.reduced_cost(j, &y, c);
                let (ok, dj) = match s {
                    VarState::Lower => (d < -self.dual_tol, 1.0),
                    VarState::Upper => (d > self.dual_tol, -1.0),
                    VarState::Free => (d.abs() > self.dual_tol, if d < 0.0 { 1.0 } else { -1.0 }),
                    VarState::Basic => unreachable!(),
                };
                if !ok {
                    continue;
                }
                if bland {
                    entering = j;
                    dir = dj;
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    entering = j;
                    dir = dj;
                }
            }
            if entering == usize::MAX {
                if !fresh {
                    // Confirm on a fresh factorization before stopping.
                    fresh = true;
                    if !self.refactor() {
                        return Status::NumericalFailure;
                    }
                    continue;
                }
                if phase1 {
                    self.farkas = Some(y);
                    return Status::Infeasible;
                }
                return Status::Optimal;
            }
            let q = entering;
            self.ftran_column(q, &mut alpha);

            // Ratio test (Harris two-pass; exact min ratio under Bland).
            let mut t_max = f64::INFINITY;
            for p in 0..self.m {
                let a = alpha[p];
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let j = self.head[p];
                let rate = -dir * a;
                if let Some((target, _)) = self.block_target(j, rate, tol_p) {
                    let relax = if bland { 0.0 } else { tol_p };
                    let bound = if rate > 0.0 { target + relax } else { target - relax };
                    let t = ((bound - self.x[j]) / rate).max(0.0);
                    if t < t_max {
                        t_max = t;
                    }
                }
            }
            let range = self.upper[q] - self.lower[q];
            let mut leave = usize::MAX;
            let mut leave_lower = false;
            let mut step = f64::INFINITY;
            if t_max.is_finite() {
                let mut best_a = 0.0;
                let mut best_j = usize::MAX;
                let mut best_t = f64::INFINITY;
                for p in 0..self.m {
                    let a = alpha[p];
                    if a.abs() < PIVOT_TOL {
                        continue;
                    }
                    let j = self.head[p];
                    let rate = -dir * a;
                    if let Some((target, at_lower)) = self.block_target(j, rate, tol_p) {
                        let t = ((target - self.x[j]) / rate).max(0.0);
                        if t > t_max + if bland { 1e-12 } else { 0.0 } {
                            continue;
                        }
                        let better = if bland {
                            t < best_t - 1e-12 || (t <= best_t + 1e-12 && j < best_j)
                        } else {
                            a.abs() > best_a || (a.abs() == best_a && j < best_j)
                        };
                        if better {
                            best_a = a.abs();
                            best_j = j;
                            best_t = t;
                            leave = p;
                            leave_lower = at_lower;
                        }
                    }
                }
                step = best_t;
            }
            if range.is_finite() && range <= step {
                // Bound flip of the entering variable.
                leave = usize::MAX;
                step = range;
            }
            if !step.is_finite() {
                if phase1 {
                    // Cannot happen for a bounded-below objective; treat as a
                    // numerical problem.
                    return Status::NumericalFailure;
                }
                let mut ray = vec![0.0; self.n + self.m];
                ray[q] = dir;
                for p in 0..self.m {
                    ray[self.head[p]] = -dir * alpha[p];
                }
                self.ray = Some(ray);
                return Status::Unbounded;
            }
            if leave != usize::MAX && alpha[leave].abs() < 1e-7 && small_pivot_retries < 3 {
                small_pivot_retries += 1;
                if !self.refactor() {
                    return Status::NumericalFailure;
                }
                continue;
            }
            small_pivot_retries = 0;
            self.iterations += 1;
            fresh = false;

            if step <= 1e-12 {
                degenerate += 1;
                if degenerate > self.cfg.stall_limit {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }

            // Update values.
            if step != 0.0 {
                self.x[q] += dir * step;
                for p in 0..self.m {
                    if alpha[p] != 0.0 {
                        let j = self.head[p];
                        self.x[j] -= dir * step * alpha[p];
                    }
                }
            }
            if leave == usize::MAX {
                self.state[q] = if dir > 0.0 { VarState::Upper } else { VarState::Lower };
                self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                continue;
            }
            let p_var = self.head[leave];
            self.x[p_var] = if leave_lower { self.lower[p_var] } else { self.upper[p_var] };
            let st = self.leaving_state(p_var, leave_lower);
            if !self.pivot(leave, q, &alpha, st) {
                return Status::NumericalFailure;
            }
        }
    }

    /// Bound a basic variable runs into when moving at `rate`, and whether it
    /// is the lower one. `None` if nothing blocks it.
    fn block_target(&self, j: usize, rate: f64, tol_p: f64) -> Option<(f64, bool)> {
        let v = self.x[j];
        let (lo, hi) = (self.lower[j], self.upper[j]);
        if v < lo - tol_p {
            // Infeasible below: blocks only when moving up into the box.
            return (rate > 0.0).then_some((lo, true));
        }
        if v > hi + tol_p {
            return (rate < 0.0).then_some((hi, false));
        }
        if rate > 0.0 {
            hi.is_finite().then_some((hi, false))
        } else {
            lo.is_finite().then_some((lo, true))
        }
    }

    /// Dual simplex from the current (refactored) basis.
    pub fn dual(&mut self) -> DualOutcome {
        self.farkas = None;
        self.ray = None;
        if !self.refactor() {
            return DualOutcome::Done(Status::NumericalFailure);
        }
        let tol_p = self.cfg.feas_tol;
        let mut cb = vec![0.0; self.m];
        let mut alpha = vec![0.0; self.m];
        let mut er = vec![0.0; self.m];
        let mut d = vec![0.0; self.n + self.m];
        let mut first = true;
        let mut degenerate = 0usize;
        let mut retries = 0;
        let mut fresh = true;
        loop {
            if self.iterations >= self.cfg.iteration_limit {
                return DualOutcome::Done(Status::IterationLimit);
            }
            // Leaving row: largest primal infeasibility.
            let mut r = usize::MAX;
            let mut worst = tol_p;
            for p in 0..self.m {
                let inf = self.infeasibility(self.head[p]);
                if inf > worst {
                    worst = inf;
                    r = p;
                }
            }
            for p in 0..self.m {
                cb[p] = self.cost[self.head[p]];
            }
            let y = self.btran(&cb);
            for j in 0..self.n + self.m {
                if self.state[j] != VarState::Basic {
                    d[j] = self.reduced_cost(j, &y, self.cost[j]);
                }
            }
            if first {
                first = false;
                let infeasible_dual = (0..self.n + self.m).any(|j| {
                    self.lower[j] != self.upper[j]
                        && match self.state[j] {
                            VarState::Lower => d[j] < -100.0 * self.dual_tol,
                            VarState::Upper => d[j] > 100.0 * self.dual_tol,
                            VarState::Free => d[j].abs() > 100.0 * self.dual_tol,
                            VarState::Basic => false,
                        }
                });
                if infeasible_dual {
                    return DualOutcome::NeedPrimal;
                }
            }
            if r == usize::MAX {
                if !fresh {
                    fresh = true;
                    if !self.refactor() {
                        return DualOutcome::Done(Status::NumericalFailure);
                    }
                    continue;
                }
                return DualOutcome::Done(Status::Optimal);
            }
            let p_var = self.head[r];
            let below = self.x[p_var] < self.lower[p_var];
            let target = if below { self.lower[p_var] } else { self.upper[p_var] };
            let delta = self.x[p_var] - target;
            let s = if below { -1.0 } else { 1.0 };

            er.iter_mut().for_each(|v| *v = 0.0);
            er[r] = 1.0;
            let rho = self.btran(&er);

            // Ratio test over the pivot row.
            let mut t_max = f64::INFINITY;
            let mut cand: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..self.n + self.m {
                let st = self.state[j];
                if st == VarState::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let a = if j < self.n {
                    self.column(j).iter().map(|&(i, v)| v * rho[i]).sum::<f64>()
                } else {
                    -rho[j - self.n]
                };
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let eligible = match st {
                    VarState::Lower => s * a > 0.0,
                    VarState::Upper => s * a < 0.0,
                    VarState::Free => true,
                    VarState::Basic => false,
                };
                if !eligible {
                    continue;
                }
                let dj = match st {
                    VarState::Lower => d[j].max(0.0),
                    VarState::Upper => (-d[j]).max(0.0),
                    _ => d[j].abs(),
                };
                let relaxed = (dj + self.dual_tol) / a.abs();
                if relaxed < t_max {
                    t_max = relaxed;
                }
                cand.push((j, dj / a.abs(), a));
            }
            if cand.is_empty() {
                let mut ray = rho;
                ray.iter_mut().for_each(|v| *v *= s);
                self.farkas = Some(ray);
                return DualOutcome::Done(Status::Infeasible);
            }
            let mut q = usize::MAX;
            let mut best_a = 0.0;
            let mut best_t = 0.0;
            for &(j, t, a) in &cand {
                if t <= t_max && a.abs() > best_a {
                    best_a = a.abs();
                    q = j;
                    best_t = t;
                }
            }
            if best_t <= 1e-12 {
                degenerate += 1;
                if degenerate > self.cfg.stall_limit {
                    return DualOutcome::NeedPrimal;
                }
            } else {
                degenerate = 0;
            }
            let row_alpha = cand.iter().find(|c| c.0 == q).map(|c| c.2).unwrap_or(0.0);
            self.ftran_column(q, &mut alpha);
            let piv = alpha[r];
            if (piv - row_alpha).abs() > 1e-7 * (1.0 + piv.abs()) || piv.abs() < PIVOT_TOL {
                retries += 1;
                if retries > 3 || !self.refactor() {
                    return DualOutcome::NeedPrimal;
                }
                continue;
            }
            retries = 0;
            self.iterations += 1;
            fresh = false;
            let dq = delta / piv;
            self.x[q] += dq;
            for p in 0..self.m {
                if alpha[p] != 0.0 {
                    let j = self.head[p];
                    self.x[j] -= alpha[p] * dq;
                }
            }
            self.x[p_var] = target;
            let st = self.leaving_state(p_var, below);
            if !self.pivot(r, q, &alpha, st) {
                return DualOutcome::Done(Status::NumericalFailure);
            }
        }
    }

    /// Dual then primal: the usual reoptimization path after bound changes.
    pub fn reoptimize(&mut self) -> Status {
        match self.dual() {
            DualOutcome::Done(Status::Optimal) | DualOutcome::NeedPrimal => self.primal(),
            DualOutcome::Done(other) => other,
        }
    }

    /// Row duals of the current basis, scaled space, row-indexed.
    pub fn duals(&mut self) -> Vec<f64> {
        let cb: Vec<f64> = self.head.iter().map(|&j| self.cost[j]).collect();
        self.btran(&cb)
    }

    /// Objective value in scaled space (which equals the unscaled one).
    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.lp.cost[j] * self.x[j]).sum()
    }
}
