//! Discretized trajectory optimization: grids, interpolated curves, travel
//! time costs and classical solution-set enumeration.

pub mod cost;
pub mod grid;
pub mod interp;
pub mod quadrature;
pub mod solutions;

pub use cost::{
    brachistochrone_cost, cycloid_time, straight_line_time, BrachistochroneConfig,
    BrachistochroneCost, CostModel, SeparableCost, TableCost,
};
pub use grid::{build_brachistochrone_grid, Grid, Path, Shape};
pub use interp::{Interpolant, Interpolation, Polynomial};
pub use quadrature::{integrate, QuadratureConfig, Singularity};
pub use solutions::{
    brute_force_minimum, cross_path_rate, derive_local_marked_sets, enumerate_solution_paths,
    in_range, project_marked_sets, Minimum, SolutionSetQuery, DEFAULT_ENUMERATION_CAP,
};
