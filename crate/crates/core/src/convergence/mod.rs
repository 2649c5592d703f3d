//! Almost isometries from sewn spaces onto the pulled-string space and the
//! convergence schedule built from them.

pub mod almost;
pub mod report;

pub use almost::{
    build_f, coverage_gap, distortion, gh_upper_bound, lip_estimate, map_nodes, AlmostIsometry,
    LIP_PAIRS,
};
pub use report::{
    mm_convergence_table, pull_geodesic, tube_volume, ConvergenceReport, ExperimentConfig,
    StepRecord, DEFAULT_A_TUBE_FACTOR, DEFAULT_CURVE_NODES,
};
