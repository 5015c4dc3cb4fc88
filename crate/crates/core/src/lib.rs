//! Day-ahead security-constrained unit commitment in which PEV fleets
//! provide primary frequency response.

pub mod domain;
pub mod evaluate;
pub mod formulation;
pub mod io;
pub mod parallel;
pub mod solve;
pub mod testgen;
