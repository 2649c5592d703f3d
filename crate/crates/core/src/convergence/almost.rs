use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{radial_point, unit_angle, FiniteMetricSpace, PulledSpace};
use crate::metric::sphere::angle_to_great_circle;
use crate::sewing::SewnSpace;

/// Pairs sampled for the Lipschitz estimate.
pub const LIP_PAIRS: usize = 100_000;

/// Map from a sewn space onto the pulled-string space with its statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmostIsometry {
    /// Target node in the pulled space of every sewn node.
    pub map: Vec<usize>,
    /// `max |d_Y(Fx, Fy) − d_X(x, y)|` over all node pairs.
    pub distortion: f64,
    /// `max_y min_x d_Y(y, Fx)`.
    pub coverage_gap: f64,
    /// Largest `d_Y(Fx, Fy) / d_X(x, y)` over the sampled pairs.
    pub lip_est: f64,
    pub lip_pairs: usize,
}

/// Assigns every sewn node its image in the pulled space.
///
/// Nodes of the edited region go to `p0`. Nodes at sphere distance `ρ` from
/// the curve with `δ ≤ ρ < 2δ` are moved along their normal geodesic to
/// distance `ρ(ρ − δ)/δ` and snapped to the nearest node of the pulled
/// space, where `p0` counts as being at distance `ρ'` from every point at
/// distance `ρ'` from the curve. All other nodes keep their base point.
pub fn map_nodes(s: &SewnSpace, y: &PulledSpace) -> Result<Vec<usize>> {
    let delta = s.plan.delta;
    let scale = 1.0 / s.plan.ambient_curvature.sqrt();
    let sc = s.space.coords.as_ref().expect("sewn spaces keep coordinates");
    let yc = y
        .space
        .coords
        .as_ref()
        .ok_or_else(|| Error::invalid("Y", "pulled space carries no coordinates"))?;
    if let Some(&b) = s.base_index.iter().find(|&&b| b >= y.map.len()) {
        return Err(Error::invalid("Y", format!("base point {b} is missing from the pulled space")));
    }
    let mut edited = vec![false; s.n()];
    for &a in &s.edited_idx {
        edited[a] = true;
    }
    let map = (0..s.n())
        .into_par_iter()
        .map(|a| {
            if edited[a] {
                return y.p0;
            }
            let rho = angle_to_great_circle(&sc[a]) * scale;
            if rho >= 2.0 * delta {
                return y.map[s.base_index[a]];
            }
            let z = radial_point(&sc[a], (rho - delta) / delta);
            let mut best = (y.p0, angle_to_great_circle(&z));
            for (v, c) in yc.iter().enumerate() {
                if v == y.p0 {
                    continue;
                }
                let d = unit_angle(&z, c);
                if d < best.1 {
                    best = (v, d);
                }
            }
            best.0
        })
        .collect();
    Ok(map)
}

/// Exact `max |d_Y(Fx, Fy) − d_X(x, y)|`, parallel by row.
pub fn distortion(map: &[usize], x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> f64 {
    (0..x.n())
        .into_par_iter()
        .map(|a| {
            let fa = map[a];
            x.dist
                .upper_row(a)
                .iter()
                .enumerate()
                .map(|(t, &dx)| (y.d(fa, map[a + 1 + t]) - dx).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// `max` over targets of the distance to the image of the map.
pub fn coverage_gap(map: &[usize], y: &FiniteMetricSpace) -> f64 {
    let mut image = map.to_vec();
    image.sort_unstable();
    image.dedup();
    if image.is_empty() {
        return f64::INFINITY;
    }
    (0..y.n())
        .into_par_iter()
        .map(|v| image.iter().map(|&u| y.d(v, u)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
}

/// Largest `d_Y(Fx, Fy) / d_X(x, y)` over `pairs` random pairs of distinct nodes.
pub fn lip_estimate(
    map: &[usize],
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    pairs: usize,
    seed: u64,
) -> f64 {
    let n = x.n();
    if n < 2 {
        return 0.0;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    let mut done = 0;
    while done < pairs {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        done += 1;
        let dx = x.d(a, b);
        if dx > 0.0 {
            best = best.max(y.d(map[a], map[b]) / dx);
        }
    }
    best
}

/// Builds `F` and measures distortion, coverage and the Lipschitz estimate.
pub fn build_f(s: &SewnSpace, y: &PulledSpace, seed: u64) -> Result<AlmostIsometry> {
    let map = map_nodes(s, y)?;
    Ok(AlmostIsometry {
        distortion: distortion(&map, &s.space, &y.space),
        coverage_gap: coverage_gap(&map, &y.space),
        lip_est: lip_estimate(&map, &s.space, &y.space, LIP_PAIRS, seed),
        lip_pairs: LIP_PAIRS,
        map,
    })
}

/// `½ max(distortion, 2 · coverage_gap)`.
pub fn gh_upper_bound(f: &AlmostIsometry) -> f64 {
    0.5 * f.distortion.max(2.0 * f.coverage_gap)
}
