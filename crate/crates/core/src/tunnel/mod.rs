//! Bending curve of the tunnel: curvature profile, smoothing and integration.

pub mod curve;
pub mod profile;
pub mod template;

pub use curve::{
    bend_margin, integrate_curve, integrate_curve_from, verify_bend_condition, BendReport,
    CurveStart, PlaneCurve, ShapeReport,
};
pub use profile::{
    build_step_profile, build_step_profile_with_tail, contraction_constant, smooth_profile,
    BendRecursion, CurvatureProfile, ALPHA_BEND_MAX, ALPHA_BEND_MIN, DEFAULT_ALPHA_BEND,
};
pub use template::smoothstep;
