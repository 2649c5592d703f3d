//! Balls along a closed geodesic, excised and joined pairwise by tunnels.

pub mod graph;
pub mod plan;
pub mod space;

pub use graph::Graph;
pub use plan::{
    center_parameters, default_schedule, diameter_bound, place_balls, SewingOptions, SewingPlan,
};
pub use space::{
    build_sewn, fidelity_report, sewn_volume_report, FidelityReport, SewnSpace, VolumeReport,
    DEFAULT_RHO_CONNECT, FIDELITY_TARGET,
};
