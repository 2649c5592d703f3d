use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::almost::{build_f, gh_upper_bound};
use crate::error::{Error, Result};
use crate::metric::{
    angle_to_great_circle, pull_set, sample_sphere3_with_curve, tags, FiniteMetricSpace,
    PulledSpace,
};
use crate::sewing::{build_sewn, place_balls, sewn_volume_report, SewingOptions};

/// Pulled-set tube radius in units of the curve node spacing.
pub const DEFAULT_A_TUBE_FACTOR: f64 = 1.5;
/// Curve nodes added to every sample.
pub const DEFAULT_CURVE_NODES: usize = 512;

/// Shared inputs of a convergence run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "N")]
    pub points: usize,
    pub seed: u64,
    #[serde(rename = "K")]
    pub ambient_curvature: f64,
    pub curve_nodes: usize,
    pub a_tube_factor: f64,
    pub rho_connect: f64,
    /// Volume tolerance of the sewn spaces.
    pub epsilon: f64,
    pub sewing: SewingOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            points: 8000,
            seed: 7,
            ambient_curvature: 1.0,
            curve_nodes: DEFAULT_CURVE_NODES,
            a_tube_factor: DEFAULT_A_TUBE_FACTOR,
            rho_connect: crate::sewing::DEFAULT_RHO_CONNECT,
            epsilon: 0.05,
            sewing: SewingOptions::default(),
        }
    }
}

impl ExperimentConfig {
    /// Tube radius of the pulled set.
    pub fn a_tube(&self) -> f64 {
        let len = 2.0 * PI / self.ambient_curvature.sqrt();
        self.a_tube_factor * len / self.curve_nodes.max(1) as f64
    }
}

/// Volume of the radius-`r` tube around a great circle of the sphere of curvature `K`.
pub fn tube_volume(ambient_curvature: f64, r: f64) -> f64 {
    let s = ambient_curvature.sqrt();
    2.0 * PI * PI * (s * r).sin().powi(2) / (s * s * s)
}

/// Pulls every sample point within `a_tube` of the marked circle to one point.
///
/// The pulled point is the first curve node, or the first pulled point when
/// the sample has no curve nodes.
pub fn pull_geodesic(x: &FiniteMetricSpace, a_tube: f64) -> Result<PulledSpace> {
    let (coords, k) = match (&x.coords, x.sphere_curvature) {
        (Some(c), Some(k)) => (c, k),
        _ => return Err(Error::invalid("X", "space is not a sphere sample")),
    };
    let scale = 1.0 / k.sqrt();
    let k_idx: Vec<usize> = (0..x.n())
        .filter(|&i| angle_to_great_circle(&coords[i]) * scale < a_tube)
        .collect();
    if k_idx.is_empty() {
        return Err(Error::invalid("a_tube", format!("no sample point within {a_tube} of the curve")));
    }
    let p0 = k_idx
        .iter()
        .copied()
        .find(|&i| x.labels[i] == tags::CURVE)
        .unwrap_or(k_idx[0]);
    pull_set(x, &k_idx, p0)
}

/// One row of the schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub j: usize,
    pub delta: f64,
    pub n: usize,
    pub h: f64,
    pub distortion: f64,
    pub gh_upper: f64,
    pub coverage_gap: f64,
    pub lip_est: f64,
    /// Surviving sample weight plus `n Vol(U)`.
    pub mass: f64,
    pub epsilon_measured: f64,
    pub neck_area: f64,
    pub diam_edited: f64,
    #[serde(rename = "H_delta")]
    pub diam_bound: f64,
    pub edited_volume: f64,
    /// Sewn node used as the base point of the ball volumes.
    pub p0_node: usize,
    pub ball_vol: Vec<f64>,
    pub fidelity_mean: f64,
    pub sewn_points: usize,
}

/// Per-step distortion, mass and ball-volume records, ordered by decreasing `δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub schedule: Vec<(f64, usize)>,
    pub r_grid: Vec<f64>,
    /// Tube volumes at `r_grid`, the limits of the ball volumes.
    pub ball_target: Vec<f64>,
    pub a_tube: f64,
    pub pulled_count: usize,
    pub steps: Vec<StepRecord>,
}

impl ConvergenceReport {
    /// CSV with header `j,delta,n,h,distortion,gh_upper,mass,neck_area`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,delta,n,h,distortion,gh_upper,mass,neck_area\n");
        for s in &self.steps {
            let _ = writeln!(
                out,
                "{},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.j, s.delta, s.n, s.h, s.distortion, s.gh_upper, s.mass, s.neck_area
            );
        }
        out
    }

    /// CSV of the ball volumes of step `j`: `r,ball_vol,target`.
    pub fn ball_csv(&self, j: usize) -> String {
        let mut out = String::from("r,ball_vol,target\n");
        let s = &self.steps[j];
        for (t, r) in self.r_grid.iter().enumerate() {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", r, s.ball_vol[t], self.ball_target[t]);
        }
        out
    }

    /// `|ball_vol − target|` at radius index `t` for every step.
    pub fn ball_errors(&self, t: usize) -> Vec<f64> {
        self.steps
            .iter()
            .map(|s| (s.ball_vol[t] - self.ball_target[t]).abs())
            .collect()
    }
}

/// Runs the schedule on one sphere sample and its pulled-string space.
pub fn mm_convergence_table(
    cfg: &ExperimentConfig,
    schedule: &[(f64, usize)],
    r_grid: &[f64],
) -> Result<ConvergenceReport> {
    if schedule.is_empty() {
        return Err(Error::invalid("schedule", "no steps given"));
    }
    if schedule.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        return Err(Error::invalid("schedule", "delta must decrease along the schedule"));
    }
    if let Some(r) = r_grid.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::invalid("r_grid", format!("{r} is not positive")));
    }
    let x = sample_sphere3_with_curve(cfg.points, cfg.ambient_curvature, cfg.seed, cfg.curve_nodes)?;
    let a_tube = cfg.a_tube();
    let y = pull_geodesic(&x, a_tube)?;

    let mut steps = Vec::with_capacity(schedule.len());
    for (j, &(delta, n)) in schedule.iter().enumerate() {
        let plan = place_balls(&x, n, delta, &cfg.sewing)?;
        let s = build_sewn(&x, &plan, cfg.rho_connect)?;
        let f = build_f(&s, &y, cfg.seed.wrapping_add(j as u64))?;
        let vol = sewn_volume_report(&s, cfg.epsilon);
        let p0_node = s
            .first_shell_node()
            .ok_or_else(|| Error::invalid("schedule", format!("step {j} has no tunnels")))?;
        let ball_vol = r_grid
            .iter()
            .map(|&r| s.space.ball_volume(p0_node, r))
            .collect::<Result<Vec<_>>>()?;
        steps.push(StepRecord {
            j,
            delta,
            n,
            h: plan.h_delta,
            distortion: f.distortion,
            gh_upper: gh_upper_bound(&f),
            coverage_gap: f.coverage_gap,
            lip_est: f.lip_est,
            mass: vol.vol_sampled,
            epsilon_measured: vol.epsilon_measured,
            neck_area: plan.neck_area,
            diam_edited: s.edited_diameter(),
            diam_bound: plan.diam_bound,
            edited_volume: s.edited_volume(),
            p0_node,
            ball_vol,
            fidelity_mean: s.fidelity.mean_rel_error,
            sewn_points: s.n(),
        });
    }
    Ok(ConvergenceReport {
        config: cfg.clone(),
        schedule: schedule.to_vec(),
        r_grid: r_grid.to_vec(),
        ball_target: r_grid.iter().map(|&r| tube_volume(cfg.ambient_curvature, r)).collect(),
        a_tube,
        pulled_count: y.pulled.len(),
        steps,
    })
}
