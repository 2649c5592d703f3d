use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::sphere::dot4;
use crate::metric::{curve_node_indices, great_circle_point, unit_angle, FiniteMetricSpace};
use crate::revolution::{TunnelOptions, TunnelSurface};

/// Ratio `δ0 / δ` used for the tunnels.
pub const DELTA0_FRACTION: f64 = 0.1;
/// Default shell thickness as a fraction of `δ`.
pub const SHELL_FRACTION: f64 = 0.25;
/// Minimum shell thickness in units of the sample spacing near the curve.
pub const SHELL_SPACING_FACTOR: f64 = 1.5;
/// Relative rounding allowance when testing tangent balls for overlap.
pub const OVERLAP_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SewingOptions {
    /// Shell thickness. `None` takes `max(δ/4, 1.5 × spacing)`.
    pub shell_width: Option<f64>,
    pub tunnel: TunnelOptions,
}

/// Placement of `2n` balls along the marked great circle and the tunnel data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SewingPlan {
    pub n: usize,
    pub delta: f64,
    pub delta0: f64,
    #[serde(rename = "K")]
    pub ambient_curvature: f64,
    pub curve_len: f64,
    /// Sample indices of the ball centers; tunnel `j` joins centers `2j` and `2j+1`.
    pub centers: Vec<usize>,
    /// Arclength parameters of the exact centers on the curve.
    pub center_params: Vec<f64>,
    pub h_delta: f64,
    pub shell_width: f64,
    /// `L/n + (n+1)h + (5n+2)δ`.
    #[serde(rename = "H_delta")]
    pub diam_bound: f64,
    #[serde(rename = "volume_U")]
    pub volume_u: f64,
    pub neck_area: f64,
    pub min_scal: f64,
    pub n_h: f64,
    pub n_delta: f64,
}

/// Exact arclength parameters `L(j/n) + δ` and `L(j+1)/n − δ`, `j = 0…n−1`.
pub fn center_parameters(n: usize, delta: f64, curve_len: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        out.push(curve_len * j as f64 / n as f64 + delta);
        out.push(curve_len * (j + 1) as f64 / n as f64 - delta);
    }
    out
}

/// `L/n + (n+1)h + (5n+2)δ`; infinite for `n = 0`.
pub fn diameter_bound(curve_len: f64, n: usize, h: f64, delta: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    let nf = n as f64;
    curve_len / nf + (nf + 1.0) * h + (5.0 * nf + 2.0) * delta
}

/// Places the balls and builds the tunnel for `δ0 = δ/10`.
pub fn place_balls(
    x: &FiniteMetricSpace,
    n: usize,
    delta: f64,
    opts: &SewingOptions,
) -> Result<SewingPlan> {
    let k = match (&x.coords, x.sphere_curvature) {
        (Some(_), Some(k)) => k,
        _ => return Err(Error::invalid("X", "space is not a sphere sample")),
    };
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid("delta", format!("{delta} is not positive")));
    }
    let scale = 1.0 / k.sqrt();
    let curve_len = 2.0 * PI * scale;
    if 4.0 * n as f64 * delta >= curve_len {
        return Err(Error::invalid(
            "delta",
            format!("{} balls of radius {delta} do not fit on a curve of length {curve_len}", 2 * n),
        ));
    }
    let delta0 = DELTA0_FRACTION * delta;

    let shell_width = match opts.shell_width {
        Some(w) if w > 0.0 && w.is_finite() => w,
        Some(w) => return Err(Error::invalid("shell_width", format!("{w} is not positive"))),
        None => {
            let curve = curve_node_indices(x).len();
            let spacing = if curve > 0 {
                curve_len / curve as f64
            } else {
                (x.total_weight() / x.n() as f64).cbrt()
            };
            (SHELL_FRACTION * delta).max(SHELL_SPACING_FACTOR * spacing)
        }
    };

    let center_params = center_parameters(n, delta, curve_len);
    let exact: Vec<[f64; 4]> = center_params
        .iter()
        .map(|&s| great_circle_point(s / scale))
        .collect();
    let coords = x.coords.as_ref().expect("checked above");
    // Consecutive balls of neighbouring tunnels are tangent, so each center
    // snaps to the nearest point keeping distance 2δ from the other exact centers.
    let slack = 1.0 - OVERLAP_RTOL;
    let mut centers = Vec::with_capacity(exact.len());
    for (i, q) in exact.iter().enumerate() {
        let best = (0..x.n())
            .filter(|&p| {
                exact.iter().enumerate().all(|(k, e)| {
                    k == i || unit_angle(&coords[p], e) * scale >= 2.0 * delta * slack
                })
            })
            .map(|p| (p, dot4(&coords[p], q)))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        match best {
            Some((p, _)) => centers.push(p),
            None => {
                return Err(Error::invalid(
                    "delta",
                    format!("no sample point can center ball {i} without overlap"),
                ))
            }
        }
    }

    // Disjointness on the sample: no point lies in two open balls.
    for i in 0..x.n() {
        let mut inside = centers
            .iter()
            .enumerate()
            .filter(|&(_, &c)| x.d(c, i) < delta * slack);
        if let (Some((a, _)), Some((b, _))) = (inside.next(), inside.next()) {
            return Err(Error::invalid(
                "delta",
                format!("balls {a} and {b} overlap at sample point {i}"),
            ));
        }
    }

    let (h_delta, volume_u, neck_area, min_scal) = if n > 0 {
        let t = TunnelSurface::build(k, delta, delta0, opts.tunnel)?;
        let min_scal = t.min_scalar_curvature();
        if !(min_scal > 0.0) {
            return Err(Error::NonPositiveScalar(min_scal));
        }
        (t.diam_upper(), t.volume_u(), t.neck_area(), min_scal)
    } else {
        (0.0, 0.0, 0.0, f64::INFINITY)
    };

    Ok(SewingPlan {
        n,
        delta,
        delta0,
        ambient_curvature: k,
        curve_len,
        centers,
        center_params,
        h_delta,
        shell_width,
        diam_bound: diameter_bound(curve_len, n, h_delta, delta),
        volume_u,
        neck_area,
        min_scal,
        n_h: n as f64 * h_delta,
        n_delta: n as f64 * delta,
    })
}

/// Default schedule `δ_j = 0.4·2^{−j}`, `n_j = round(δ_j^{−1/2})`.
pub fn default_schedule(steps: usize) -> Vec<(f64, usize)> {
    (0..steps)
        .map(|j| {
            let d = 0.4 * 0.5_f64.powi(j as i32);
            (d, d.powf(-0.5).round() as usize)
        })
        .collect()
}
