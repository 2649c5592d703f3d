//! Finite metric-measure spaces, sphere samples, pulled sets and ball probes.

pub mod io;
pub mod matrix;
pub mod probe;
pub mod pull;
pub mod space;
pub mod sphere;

pub use matrix::DistanceMatrix;
pub use probe::{
    euclidean_ball_volume, radius_grid, scalar_probe, scalar_probe_mean, ProbeReport,
    MIN_BALL_POINTS,
};
pub use pull::{pull_set, PulledSpace};
pub use space::{random_metric_space, tags, FiniteMetricSpace, MetricCheck};
pub use sphere::{
    angle_to_arc, angle_to_great_circle, curve_node_indices, radial_point, great_circle_point, sample_sphere3,
    sample_sphere3_with_curve, sphere3_volume, unit_angle,
};
