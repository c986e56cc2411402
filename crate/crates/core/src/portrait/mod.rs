//! Phase portrait of the reduced system: fixed points and their
//! classification, level sets of `H`, separatrices, and SVG rendering.
//!
//! Parallel work (seed grids, level-set rows, separatrix branches) runs on
//! the rayon pool; results are collected in input order so every output is
//! independent of the thread count.

mod fixed_points;
mod level_set;
mod render;
mod separatrix;

pub use fixed_points::{
    classify, find_fixed_points, is_degenerate_hamiltonian, newton, periodic_distance, FixedPoint,
    FixedPointKind, DEDUP_RADIUS, HESSIAN_STEP, RESIDUAL_TOL, SEED_MARGIN,
};
pub use level_set::{level_fan, level_set, EnergyGrid, Polyline};
pub use render::{render_portrait, RenderOptions};
pub use separatrix::{
    saddle_directions, trace_separatrices, Branch, BranchEnd, Manifold, Separatrix, Topology,
    MATCH_RADIUS, SEED_OFFSET,
};
