//! Standard solutions, Wronskians and endpoint classification.

mod classify;
mod grid;
mod gridfn;
mod problem;
mod solve;
mod workspace;

pub use classify::{
    auto_truncate, classify_endpoint, classify_with, truncation_point, Classification, ClassifyOptions, EndpointClass,
    TRUNCATION_CAP,
};
pub use grid::{build_grid, build_grid_with_breaks, envelope_tail, estimate_phase, quadratic_weights, Grid};
pub use gridfn::GridFunction;
pub use problem::{Alpha, Problem, SolverSettings, XMax};
pub use solve::{endpoint_solutions, solve_basis, wronskian, wronskian_at, wronskian_limit, SolutionPair};
pub use workspace::{SolutionCache, Workspace, DEFAULT_CACHE_CAPACITY};
