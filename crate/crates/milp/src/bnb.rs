//! Branch-and-bound over binary columns.
//!
//! Nodes are evaluated lazily: a child inherits its parent's LP value as its
//! bound and the parent's optimal basis as its warm start, and its LP is
//! solved (dual simplex) only when it is popped.

use std::cmp::{Ordering, Reverse};
use std::collections::BTreeMap;
use std::rc::Rc;
use std::time::Instant;

use crate::config::{BranchRule, NodeOrder, SolverConfig};
use crate::lp::{engine_config, prepare, primal_values};
use crate::model::MilpModel;
use crate::simplex::{Basis, Engine, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    /// Search finished with the gap inside the default optimality tolerance.
    Optimal,
    /// Time limit reached with an incumbent.
    Feasible,
    Infeasible,
    /// Search finished because the configured (looser) gap was reached.
    GapLimit,
    NodeLimit,
    /// Time limit reached without an incumbent.
    TimeLimit,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct MipSolution {
    pub status: MipStatus,
    /// Incumbent in the caller's column numbering; binaries are exact 0/1.
    pub x: Option<Vec<f64>>,
    /// Incumbent objective, `+inf` without one.
    pub objective: f64,
    pub best_bound: f64,
    /// `(objective - best_bound) / max(1, |objective|)`.
    pub gap: f64,
    pub nodes: u64,
    pub root_bound: f64,
    /// Global lower bound after every processed node.
    pub bound_history: Vec<f64>,
    pub lp_iterations: usize,
}

impl MipSolution {
    fn without_incumbent(status: MipStatus) -> Self {
        Self {
            status,
            x: None,
            objective: f64::INFINITY,
            best_bound: f64::NEG_INFINITY,
            gap: f64::INFINITY,
            nodes: 0,
            root_bound: f64::NEG_INFINITY,
            bound_history: Vec::new(),
            lp_iterations: 0,
        }
    }

    pub fn has_incumbent(&self) -> bool {
        self.x.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Total(f64);

impl Eq for Total {}

impl PartialOrd for Total {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Total {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Branching decisions from the root, shared between siblings.
struct Fix {
    col: usize,
    value: f64,
    parent: Option<Rc<Fix>>,
}

struct Node {
    depth: u32,
    bound: f64,
    fixes: Option<Rc<Fix>>,
    basis: Rc<Basis>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Best(Total, Reverse<u32>, u64),
    Depth(Reverse<u32>, u64),
}

struct Search<'a> {
    model: &'a MilpModel,
    cfg: &'a SolverConfig,
    engine: Engine,
    /// (reduced index, root lower, root upper) for every unfixed binary.
    binaries: Vec<(usize, f64, f64)>,
    open: BTreeMap<Key, Node>,
    open_bounds: BTreeMap<Total, usize>,
    next_id: u64,
    incumbent: Option<(f64, Vec<f64>)>,
    pruned_min: f64,
    uncertain: bool,
}

impl Search<'_> {
    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((obj, _)) => obj - self.cfg.abs_gap.max(self.cfg.rel_gap * obj.abs()),
            None => f64::INFINITY,
        }
    }

    fn global_bound(&self) -> f64 {
        let open = self.open_bounds.keys().next().map(|t| t.0).unwrap_or(f64::INFINITY);
        let inc = self.incumbent.as_ref().map(|i| i.0).unwrap_or(f64::INFINITY);
        open.min(self.pruned_min).min(inc)
    }

    fn note_pruned(&mut self, bound: f64) {
        let inc = self.incumbent.as_ref().map(|i| i.0).unwrap_or(f64::INFINITY);
        if bound < inc {
            self.pruned_min = self.pruned_min.min(bound);
        }
    }

    fn push(&mut self, node: Node) {
        let id = self.next_id;
        self.next_id += 1;
        let key = match self.cfg.node_order {
            NodeOrder::BestBound => Key::Best(Total(node.bound), Reverse(node.depth), id),
            NodeOrder::DepthFirst => Key::Depth(Reverse(node.depth), id),
        };
        *self.open_bounds.entry(Total(node.bound)).or_insert(0) += 1;
        self.open.insert(key, node);
    }

    fn pop(&mut self) -> Option<Node> {
        let (_, node) = self.open.pop_first()?;
        let t = Total(node.bound);
        if let Some(c) = self.open_bounds.get_mut(&t) {
            *c -= 1;
            if *c == 0 {
                self.open_bounds.remove(&t);
            }
        }
        Some(node)
    }

    fn apply_fixes(&mut self, fixes: &Option<Rc<Fix>>) {
        for &(k, lo, hi) in &self.binaries {
            self.engine.set_col_bounds(k, lo, hi);
        }
        let mut cur = fixes.clone();
        while let Some(f) = cur {
            let s = self.engine.lp.col_scale[f.col];
            self.engine.set_col_bounds(f.col, f.value / s, f.value / s);
            cur = f.parent.clone();
        }
    }

    fn binary_value(&self, k: usize) -> f64 {
        self.engine.x[k] * self.engine.lp.col_scale[k]
    }

    fn select_branch(&self) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for &(k, _, _) in &self.binaries {
            let v = self.binary_value(k);
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac <= self.cfg.int_tol {
                continue;
            }
            let orig = self.engine.lp.col_map[k];
            match self.cfg.branch_rule {
                BranchRule::FirstFractional => {
                    if best.map_or(true, |b| orig < b.1) {
                        best = Some((frac, orig));
                    }
                }
                BranchRule::MostFractional => {
                    let better = match best {
                        None => true,
                        Some((bf, bo)) => frac > bf + 1e-12 || (frac >= bf - 1e-12 && orig < bo),
                    };
                    if better {
                        best = Some((frac, orig));
                    }
                }
            }
        }
        best.map(|(_, orig)| orig)
    }

    /// Pins every binary to its rounded LP value and reoptimizes, returning
    /// the polished objective and point.
    fn polish(&mut self) -> Option<(f64, Vec<f64>)> {
        let bins = self.binaries.clone();
        for &(k, _, _) in &bins {
            let v = self.binary_value(k).round();
            let s = self.engine.lp.col_scale[k];
            self.engine.set_col_bounds(k, v / s, v / s);
        }
        let status = self.engine.reoptimize();
        if status != Status::Optimal {
            log::warn!("polishing an integral node failed: {status:?}");
            return None;
        }
        let mut x = primal_values(self.model, &self.engine);
        for &j in &self.model.binary_columns() {
            x[j] = x[j].round();
        }
        Some((self.model.objective_value(&x), x))
    }

    /// Handles a solved node LP: prune, record an incumbent, or branch.
    fn after_lp(&mut self, node_bound: f64, depth: u32, fixes: &Option<Rc<Fix>>) {
        let obj = self.engine.objective();
        let bound = obj.max(node_bound);
        if bound >= self.cutoff() {
            self.note_pruned(bound);
            return;
        }
        match self.select_branch() {
            None => {
                if let Some((val, x)) = self.polish() {
                    let better = self.incumbent.as_ref().map_or(true, |(o, _)| val < *o);
                    if better {
                        log::debug!("incumbent {val:.6} at depth {depth}");
                        self.incumbent = Some((val, x));
                    }
                } else {
                    self.uncertain = true;
                }
            }
            Some(orig) => {
                let k = self.engine.lp.col_map.binary_search(&orig).expect("binary column kept");
                let basis = Rc::new(self.engine.basis());
                for value in [1.0, 0.0] {
                    let fix = Rc::new(Fix {
                        col: k,
                        value,
                        parent: fixes.clone(),
                    });
                    self.push(Node {
                        depth: depth + 1,
                        bound,
                        fixes: Some(fix),
                        basis: Rc::clone(&basis),
                    });
                }
            }
        }
    }
}

/// Solves `model` to the configured gap.
pub fn solve_mip(model: &MilpModel, cfg: &SolverConfig) -> MipSolution {
    solve_mip_with_start(model, cfg, None)
}

/// As [`solve_mip`], seeding the search with `start` as the incumbent when it
/// is feasible and integral.
pub fn solve_mip_with_start(model: &MilpModel, cfg: &SolverConfig, start: Option<&[f64]>) -> MipSolution {
    let started = Instant::now();
    let lp = match prepare(model, cfg) {
        Ok(lp) => lp,
        Err(_) => return MipSolution::without_incumbent(MipStatus::Infeasible),
    };
    let mut col_index = vec![usize::MAX; model.num_cols()];
    for (k, &j) in lp.col_map.iter().enumerate() {
        col_index[j] = k;
    }
    let binaries: Vec<(usize, f64, f64)> = model
        .binary_columns()
        .into_iter()
        .filter(|&j| col_index[j] != usize::MAX)
        .map(|j| {
            let k = col_index[j];
            (k, lp.col_lower[k], lp.col_upper[k])
        })
        .collect();

    let mut engine = Engine::new(lp, engine_config(cfg));
    let root_status = engine.primal();
    match root_status {
        Status::Optimal => {}
        Status::Infeasible => return MipSolution::without_incumbent(MipStatus::Infeasible),
        Status::Unbounded => return MipSolution::without_incumbent(MipStatus::Unbounded),
        _ => return MipSolution::without_incumbent(MipStatus::NumericalFailure),
    }
    let root_bound = engine.objective();
    let root_basis = Rc::new(engine.basis());

    let mut search = Search {
        model,
        cfg,
        engine,
        binaries,
        open: BTreeMap::new(),
        open_bounds: BTreeMap::new(),
        next_id: 0,
        incumbent: None,
        pruned_min: f64::INFINITY,
        uncertain: false,
    };
    if let Some(x0) = start {
        let integral = model.binary_columns().iter().all(|&j| (x0[j] - x0[j].round()).abs() <= cfg.int_tol);
        if x0.len() == model.num_cols() && integral && model.max_violation(x0) <= 1e-6 {
            search.incumbent = Some((model.objective_value(x0), x0.to_vec()));
        } else {
            log::warn!("ignoring infeasible start point");
        }
    }

    let mut nodes: u64 = 1;
    let mut history = Vec::new();
    search.after_lp(f64::NEG_INFINITY, 0, &None);
    history.push(search.global_bound());
    let mut limit = None;

    loop {
        if search.open_bounds.keys().next().map_or(true, |t| t.0 >= search.cutoff()) {
            // Everything left is dominated by the incumbent.
            while let Some(node) = search.pop() {
                search.note_pruned(node.bound);
            }
            break;
        }
        if cfg.node_limit.is_some_and(|l| nodes >= l) {
            limit = Some(MipStatus::NodeLimit);
            break;
        }
        if cfg.time_limit.is_some_and(|l| started.elapsed() >= l) {
            limit = Some(if search.incumbent.is_some() { MipStatus::Feasible } else { MipStatus::TimeLimit });
            break;
        }
        let node = search.pop().expect("open node");
        if node.bound >= search.cutoff() {
            search.note_pruned(node.bound);
            continue;
        }
        nodes += 1;
        search.apply_fixes(&node.fixes);
        search.engine.set_basis(&node.basis);
        let mut status = search.engine.reoptimize();
        if matches!(status, Status::IterationLimit | Status::NumericalFailure) {
            search.engine.set_basis(&root_basis);
            status = search.engine.primal();
        }
        match status {
            Status::Optimal => search.after_lp(node.bound, node.depth, &node.fixes),
            Status::Infeasible => {}
            other => {
                log::warn!("node LP failed with {other:?}; dropping node");
                search.uncertain = true;
                search.note_pruned(node.bound);
            }
        }
        history.push(search.global_bound());
        if nodes % 1000 == 0 {
            log::info!(
                "nodes {nodes} open {} bound {:.6} incumbent {:?}",
                search.open.len(),
                search.global_bound(),
                search.incumbent.as_ref().map(|i| i.0)
            );
        }
    }

    let best_bound = search.global_bound();
    let lp_iterations = search.engine.iterations;
    let mut sol = MipSolution::without_incumbent(MipStatus::Infeasible);
    sol.nodes = nodes;
    sol.root_bound = root_bound;
    sol.bound_history = history;
    sol.lp_iterations = lp_iterations;
    sol.best_bound = best_bound;
    match search.incumbent {
        Some((obj, x)) => {
            let best_bound = best_bound.min(obj);
            sol.best_bound = best_bound;
            sol.objective = obj;
            sol.gap = (obj - best_bound) / obj.abs().max(1.0);
            sol.x = Some(x);
            sol.status = match limit {
                Some(s) => s,
                None if search.uncertain => MipStatus::Feasible,
                None if obj - best_bound <= 1e-6f64.max(1e-6 * obj.abs()) => MipStatus::Optimal,
                None => MipStatus::GapLimit,
            };
        }
        None => {
            sol.status = match limit {
                Some(s) => s,
                None if search.uncertain => MipStatus::NumericalFailure,
                None => MipStatus::Infeasible,
            };
        }
    }
    sol
}
