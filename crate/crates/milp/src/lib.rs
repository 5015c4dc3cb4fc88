//! Self-contained MILP kernel: a bounded-variable revised simplex for LP
//! relaxations and a deterministic branch-and-bound over binary columns.
//!
//! ```
//! use gridsched_milp::{solve_lp, LpStatus, MilpModel, Sense, SolverConfig};
//!
//! let mut m = MilpModel::new();
//! let x = m.add_column("x", 0.0, 10.0, 1.0, false);
//! m.add_row("r", vec![(x, 1.0)], Sense::Ge, 3.0);
//! let sol = solve_lp(&m, &SolverConfig::default());
//! assert_eq!(sol.status, LpStatus::Optimal);
//! assert!((sol.objective - 3.0).abs() < 1e-9);
//! ```

mod bnb;
mod config;
mod error;
pub mod generator;
mod lp;
mod lu;
mod model;
mod presolve;
mod simplex;

pub use bnb::{solve_mip, solve_mip_with_start, MipSolution, MipStatus};
pub use config::{BranchRule, NodeOrder, SolverConfig};
pub use error::ModelError;
pub use lp::{farkas_certifies, solve_lp, LpSolution, LpStatus};
pub use model::{fix_binaries, Column, MilpModel, Row, Sense};
