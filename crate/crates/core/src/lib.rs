//! Simulator and analysis toolkit for parallel-Grover grid search.
//!
//! * [`grover`]: exact single-register Grover simulation and its closed form.
//! * [`grid_search`]: parallel registers with an adaptively scaled iteration budget.
//! * [`analysis`]: success-probability and runtime formulas, Monte Carlo harnesses.
//! * [`bisect`]: binary search on cost bounds driven by grid searches.
//! * [`trajectory`]: discretized brachistochrone grids, costs and solution sets.
//! * [`baseline`]: classical exhaustive search with exact query counts.
//! * [`cli`]: the experiment runner behind the `qgrid` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod baseline;
pub mod bisect;
pub mod cli;
pub mod error;
pub mod grid_search;
pub mod grover;
pub mod rng;
pub mod trajectory;

pub use error::{Error, Result};
