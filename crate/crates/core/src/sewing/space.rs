use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::Graph;
use super::plan::SewingPlan;
use crate::error::{Error, Result};
use crate::metric::{
    angle_to_arc, angle_to_great_circle, great_circle_point, sphere3_volume, unit_angle, FiniteMetricSpace,
};
use crate::revolution::v_ball;

/// Default connection radius of the proximity graph.
pub const DEFAULT_RHO_CONNECT: f64 = 0.45;
/// Pairs drawn for the fidelity check.
pub const FIDELITY_PAIRS: usize = 1000;
/// Target for the mean relative error of the graph metric away from the tunnels.
pub const FIDELITY_TARGET: f64 = 0.03;
const FIDELITY_SEED: u64 = 0x5eed_f1de;
const FIDELITY_MAX_DRAWS: usize = 2_000_000;

/// Graph metric against sphere distance on pairs no tunnel can shorten.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub pairs: usize,
    pub max_rel_error: f64,
    pub mean_rel_error: f64,
    /// Largest `base − sewn` relative to base; positive values mean the graph is shorter.
    pub max_rel_shortening: f64,
    pub target: f64,
    pub ok: bool,
}

/// Sphere sample with the balls excised and the tunnel shortcuts added.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SewnSpace {
    /// Surviving points with the shortest-path metric of the sewn graph.
    /// Coordinates and labels are those of the base sample.
    pub space: FiniteMetricSpace,
    /// Index in the base sample of every node.
    pub base_index: Vec<usize>,
    /// Nodes of the edited region: the `δ`-tube around the curve minus the
    /// excised interiors, together with every shell.
    pub edited_idx: Vec<usize>,
    /// Shell nodes of each ball, in the order of `plan.centers`.
    pub shells: Vec<Vec<usize>>,
    pub plan: SewingPlan,
    pub rho_connect: f64,
    pub edge_count: usize,
    pub fidelity: FidelityReport,
}

impl SewnSpace {
    pub fn n(&self) -> usize {
        self.space.n()
    }

    fn scale(&self) -> f64 {
        1.0 / self.plan.ambient_curvature.sqrt()
    }

    fn coords(&self) -> &[[f64; 4]] {
        self.space.coords.as_deref().expect("sewn spaces keep coordinates")
    }

    /// Geodesic distance in the unsewn sphere.
    pub fn base_distance(&self, a: usize, b: usize) -> f64 {
        let c = self.coords();
        unit_angle(&c[a], &c[b]) * self.scale()
    }

    /// Sphere distance from node `a` to the marked curve.
    pub fn distance_to_curve(&self, a: usize) -> f64 {
        angle_to_great_circle(&self.coords()[a]) * self.scale()
    }

    /// Diameter of the edited region in the sewn metric.
    pub fn edited_diameter(&self) -> f64 {
        self.space.subset_diameter(&self.edited_idx)
    }

    /// Weight carried by the edited region.
    pub fn edited_volume(&self) -> f64 {
        self.edited_idx.iter().map(|&i| self.space.weight[i]).sum()
    }

    /// Both shells of tunnel `j`.
    pub fn tunnel_shells(&self, j: usize) -> (&[usize], &[usize]) {
        (&self.shells[2 * j], &self.shells[2 * j + 1])
    }

    /// The shell node of the first tunnel with the smallest index.
    pub fn first_shell_node(&self) -> Option<usize> {
        if self.plan.n == 0 {
            return None;
        }
        let (a, b) = self.tunnel_shells(0);
        a.iter().chain(b).copied().min()
    }
}

/// Excises the ball interiors, connects the survivors and computes the sewn metric.
pub fn build_sewn(x: &FiniteMetricSpace, plan: &SewingPlan, rho_connect: f64) -> Result<SewnSpace> {
    let coords = match (&x.coords, x.sphere_curvature) {
        (Some(c), Some(_)) => c,
        _ => return Err(Error::invalid("X", "space is not a sphere sample")),
    };
    if !(rho_connect > 0.0 && rho_connect.is_finite()) {
        return Err(Error::invalid("rho_connect", format!("{rho_connect} is not positive")));
    }
    if plan.centers.iter().any(|&c| c >= x.n()) {
        return Err(Error::invalid("plan", "center index outside the sample"));
    }
    let scale = 1.0 / plan.ambient_curvature.sqrt();
    let hole = plan.delta / 2.0;
    let shell_outer = hole + plan.shell_width;

    let kept: Vec<usize> = (0..x.n())
        .filter(|&i| plan.centers.iter().all(|&c| x.d(c, i) >= hole))
        .collect();
    let m = kept.len();

    let shells: Vec<Vec<usize>> = plan
        .centers
        .iter()
        .map(|&c| (0..m).filter(|&a| x.d(c, kept[a]) <= shell_outer).collect())
        .collect();
    if let Some(i) = shells.iter().position(Vec::is_empty) {
        return Err(Error::Construction(format!(
            "shell of ball {i} holds no sample point; widen shell_width or add points"
        )));
    }

    // Base edges, skipping arcs that cross an excised interior.
    let crosses_hole = |i: usize, j: usize, d: f64| {
        plan.centers.iter().any(|&c| {
            x.d(c, i) - d < hole && angle_to_arc(&coords[c], &coords[i], &coords[j]) * scale < hole
        })
    };
    let per_node: Vec<Vec<(u32, u32, f64)>> = (0..m)
        .into_par_iter()
        .map(|a| {
            let i = kept[a];
            let mut out = Vec::new();
            for (b, &j) in kept.iter().enumerate().skip(a + 1) {
                let d = x.d(i, j);
                if d <= rho_connect && !crosses_hole(i, j, d) {
                    out.push((a as u32, b as u32, d));
                }
            }
            out
        })
        .collect();
    let mut edges: Vec<(u32, u32, f64)> = per_node.into_iter().flatten().collect();
    for j in 0..plan.n {
        for &a in &shells[2 * j] {
            for &b in &shells[2 * j + 1] {
                edges.push((a as u32, b as u32, plan.h_delta));
            }
        }
    }
    let graph = Graph::from_edges(m, &edges);
    let comps = graph.components();
    if comps.len() > 1 {
        let smallest = comps
            .iter()
            .min_by_key(|c| (c.len(), c[0]))
            .expect("at least two components");
        return Err(Error::Disconnected {
            size: smallest.len(),
            representative: kept[smallest[0]],
        });
    }

    let dist = graph.all_pairs();
    let mut space = FiniteMetricSpace::new(dist, kept.iter().map(|&i| x.weight[i]).collect())?;
    space.coords = Some(kept.iter().map(|&i| coords[i]).collect());
    space.labels = kept.iter().map(|&i| x.labels[i]).collect();

    let mut in_edit = vec![false; m];
    for (a, &i) in kept.iter().enumerate() {
        if angle_to_great_circle(&coords[i]) * scale < plan.delta {
            in_edit[a] = true;
        }
    }
    for s in &shells {
        for &a in s {
            in_edit[a] = true;
        }
    }
    let edited_idx = (0..m).filter(|&a| in_edit[a]).collect();

    let mut sewn = SewnSpace {
        space,
        base_index: kept,
        edited_idx,
        shells,
        plan: plan.clone(),
        rho_connect,
        edge_count: graph.edge_count(),
        fidelity: FidelityReport {
            pairs: 0,
            max_rel_error: 0.0,
            mean_rel_error: 0.0,
            max_rel_shortening: 0.0,
            target: FIDELITY_TARGET,
            ok: false,
        },
    };
    sewn.fidelity = fidelity_report(&sewn);
    Ok(sewn)
}

/// Compares sewn and sphere distances on random pairs that no tunnel can
/// shorten and whose connecting arc avoids every ball.
pub fn fidelity_report(s: &SewnSpace) -> FidelityReport {
    let plan = &s.plan;
    let m = s.n();
    // Exact center positions; the snapped centers themselves were excised.
    let centers: Vec<[f64; 4]> = plan
        .center_params
        .iter()
        .map(|&t| great_circle_point(t / s.scale()))
        .collect();
    let scale = s.scale();
    let coords = s.coords();
    let near = plan.delta + plan.shell_width + plan.h_delta;
    let to_centers: Vec<f64> = (0..m)
        .map(|a| {
            centers
                .iter()
                .map(|c| unit_angle(c, &coords[a]) * scale)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let eligible: Vec<usize> = (0..m).filter(|&a| to_centers[a] > near).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(FIDELITY_SEED);
    let mut errs = Vec::with_capacity(FIDELITY_PAIRS);
    let mut short: f64 = 0.0;
    let mut draws = 0;
    while errs.len() < FIDELITY_PAIRS && draws < FIDELITY_MAX_DRAWS && eligible.len() > 1 {
        draws += 1;
        let a = eligible[rng.gen_range(0..eligible.len())];
        let b = eligible[rng.gen_range(0..eligible.len())];
        if a == b {
            continue;
        }
        let base = s.base_distance(a, b);
        if plan.n > 0 {
            let via_tunnel =
                to_centers[a] + to_centers[b] - plan.delta - 2.0 * plan.shell_width + plan.h_delta;
            if via_tunnel < base {
                continue;
            }
            let clear = centers
                .iter()
                .all(|c| angle_to_arc(c, &coords[a], &coords[b]) * scale > plan.delta);
            if !clear {
                continue;
            }
        }
        let sewn = s.space.d(a, b);
        errs.push((sewn - base).abs() / base);
        short = short.max((base - sewn) / base);
    }
    let pairs = errs.len();
    let max_rel_error = errs.iter().copied().fold(0.0, f64::max);
    let mean_rel_error = if pairs > 0 {
        errs.iter().sum::<f64>() / pairs as f64
    } else {
        0.0
    };
    FidelityReport {
        pairs,
        max_rel_error,
        mean_rel_error,
        max_rel_shortening: short,
        target: FIDELITY_TARGET,
        ok: pairs > 0 && mean_rel_error <= FIDELITY_TARGET,
    }
}

/// Volume bookkeeping of a sewn space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    /// Volume of the round sphere.
    pub vol_base: f64,
    /// Weight of the surviving sample points.
    pub surviving_weight: f64,
    pub volume_u: f64,
    /// `2n V_ball(δ/2)`.
    pub excised: f64,
    /// `Vol(M) − 2n V_ball(δ/2) + n Vol(U)`.
    pub vol_model: f64,
    /// Surviving weight plus `n Vol(U)`.
    pub vol_sampled: f64,
    /// `|vol_model / Vol(M) − 1|`.
    pub epsilon_measured: f64,
    /// `|vol_sampled / Vol(M) − 1|`.
    pub epsilon_sampled: f64,
    pub epsilon: f64,
    pub ok: bool,
}

pub fn sewn_volume_report(s: &SewnSpace, epsilon: f64) -> VolumeReport {
    let plan = &s.plan;
    let k = plan.ambient_curvature;
    let nf = plan.n as f64;
    let vol_base = sphere3_volume(k);
    let surviving_weight = s.space.total_weight();
    let excised = 2.0 * nf * v_ball(k, plan.delta / 2.0);
    let vol_model = vol_base - excised + nf * plan.volume_u;
    let vol_sampled = surviving_weight + nf * plan.volume_u;
    let epsilon_measured = (vol_model / vol_base - 1.0).abs();
    VolumeReport {
        vol_base,
        surviving_weight,
        volume_u: plan.volume_u,
        excised,
        vol_model,
        vol_sampled,
        epsilon_measured,
        epsilon_sampled: (vol_sampled / vol_base - 1.0).abs(),
        epsilon,
        ok: epsilon_measured <= epsilon,
    }
}
