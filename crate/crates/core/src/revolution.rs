//! Hypersurface of revolution over the bending curve and the assembled tunnel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tunnel::{
    build_step_profile_with_tail, integrate_curve, smooth_profile, CurvatureProfile, PlaneCurve,
    DEFAULT_ALPHA_BEND,
};

/// Scalar curvature of the revolution hypersurface from the normal angle,
/// profile height and curve curvature.
pub fn scalar_curvature_at(theta: f64, x1: f64, k: f64) -> f64 {
    let q = theta.sin() / x1;
    2.0 * q * (q - 2.0 * k)
}

/// Scalar curvature at sample `i` of the curve.
pub fn scalar_curvature(c: &PlaneCurve, i: usize) -> f64 {
    scalar_curvature_at(c.theta[i], c.x1[i], c.k[i])
}

/// Volume of a geodesic ball of radius `rho` in the 3-sphere of curvature `K`.
pub fn v_ball(ambient_curvature: f64, rho: f64) -> f64 {
    let r = ambient_curvature.sqrt();
    let t = 2.0 * r * rho;
    if t < 1e-3 {
        // Series avoids cancellation in t − sin t.
        let t3 = t * t * t;
        return PI / (r * r * r) * (t3 / 6.0 - t3 * t * t / 120.0 + t3 * t3 * t / 5040.0);
    }
    PI / (r * r * r) * (t - t.sin())
}

/// Volume of the radius-`r` tube around a great circle of the unit 3-sphere.
pub fn great_circle_tube_volume(r: f64) -> f64 {
    2.0 * PI * PI * r.sin().powi(2)
}

/// `∫ 4π x1(s)² ds` by the trapezoid rule on the curve samples.
pub fn volume_uprime(c: &PlaneCurve) -> f64 {
    let mut acc = 0.0;
    for i in 1..c.len() {
        let a = c.x1[i - 1];
        let b = c.x1[i];
        acc += 0.5 * (a * a + b * b) * c.ds[i];
    }
    4.0 * PI * acc
}

/// Construction knobs shared by everything that builds a tunnel curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TunnelOptions {
    pub alpha_bend: f64,
    /// Absolute smoothing width. `None` picks a tenth of the shortest segment;
    /// `Some(0.0)` keeps the step profile.
    pub smooth_width: Option<f64>,
    /// Integration step. `None` uses `δ0 / 2000`.
    pub step: Option<f64>,
    /// Horizontal tail length. `None` uses `δ0 / 10`.
    pub tail_length: Option<f64>,
}

impl Default for TunnelOptions {
    fn default() -> Self {
        TunnelOptions {
            alpha_bend: DEFAULT_ALPHA_BEND,
            smooth_width: None,
            step: None,
            tail_length: None,
        }
    }
}

/// Fraction of the shortest step segment used as the automatic smoothing width.
pub const AUTO_SMOOTH_FRACTION: f64 = 0.1;

/// Builds the (optionally smoothed) profile and integrates its curve.
pub fn build_curve(
    ambient_curvature: f64,
    delta0: f64,
    opts: &TunnelOptions,
) -> Result<(CurvatureProfile, PlaneCurve)> {
    let tail = opts.tail_length.unwrap_or(delta0 / 10.0);
    let step_profile =
        build_step_profile_with_tail(ambient_curvature, delta0, opts.alpha_bend, tail)?;
    let width = match opts.smooth_width {
        Some(w) => w,
        None => {
            let n = step_profile.segment_count() - 1;
            let shortest = step_profile.segment_lengths[..n]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            AUTO_SMOOTH_FRACTION * shortest
        }
    };
    let profile = smooth_profile(&step_profile, width)?;
    let step = opts.step.unwrap_or(delta0 / 2000.0);
    let curve = integrate_curve(&profile, step)?;
    Ok((profile, curve))
}

/// One tunnel: the revolution piece over `curve`, attached to two collars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TunnelSurface {
    pub curve: PlaneCurve,
    #[serde(rename = "K")]
    pub ambient_curvature: f64,
    pub delta: f64,
    pub delta0: f64,
    pub options: TunnelOptions,
}

impl TunnelSurface {
    pub fn build(
        ambient_curvature: f64,
        delta: f64,
        delta0: f64,
        options: TunnelOptions,
    ) -> Result<Self> {
        if !(delta0 > 0.0 && delta0 < delta / 2.0 && delta / 2.0 < 1.0) {
            return Err(Error::invalid(
                "delta0",
                format!("need 0 < delta0 < delta/2 < 1, got delta0={delta0}, delta={delta}"),
            ));
        }
        let (_, curve) = build_curve(ambient_curvature, delta0, &options)?;
        Ok(TunnelSurface {
            curve,
            ambient_curvature,
            delta,
            delta0,
            options,
        })
    }

    pub fn min_scalar_curvature(&self) -> f64 {
        (0..self.curve.len())
            .map(|i| scalar_curvature(&self.curve, i))
            .fold(f64::INFINITY, f64::min)
    }

    /// `πδ + δ + 2L`, the upper bound on the tunnel diameter.
    pub fn diam_upper(&self) -> f64 {
        PI * self.delta + self.delta + 2.0 * self.curve.length
    }

    pub fn volume_u(&self) -> f64 {
        let k = self.ambient_curvature;
        2.0 * (v_ball(k, self.delta / 2.0) - v_ball(k, self.delta0)) + 2.0 * volume_uprime(&self.curve)
    }

    pub fn neck_area(&self) -> f64 {
        4.0 * PI * self.curve.min_x1().powi(2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub min_scal: f64,
    #[serde(rename = "volume_Uprime")]
    pub volume_uprime: f64,
    #[serde(rename = "volume_U")]
    pub volume_u: f64,
    pub diam_upper: f64,
    pub neck_area: f64,
    pub vol_bound_ok: bool,
    pub epsilon: f64,
    /// `2 V_ball(δ/2)`, the reference volume of the bound.
    pub vol_target: f64,
    /// Largest `δ0 ≤ δ/10` meeting the volume bound, when the given `δ0` misses it.
    pub delta0_for_bound: Option<f64>,
}

fn within(v: f64, target: f64, eps: f64) -> bool {
    (1.0 - eps) * target <= v && v <= (1.0 + eps) * target
}

/// Scalar-curvature, volume and diameter summary of a tunnel.
pub fn tunnel_summary(t: &TunnelSurface, epsilon: f64) -> Result<GeometrySummary> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon", format!("{epsilon} is outside (0, 1)")));
    }
    let min_scal = t.min_scalar_curvature();
    if !(min_scal > 0.0) {
        return Err(Error::NonPositiveScalar(min_scal));
    }
    let target = 2.0 * v_ball(t.ambient_curvature, t.delta / 2.0);
    let volume_u = t.volume_u();
    let ok = within(volume_u, target, epsilon);
    let delta0_for_bound = if ok {
        None
    } else {
        largest_delta0_for_bound(t, epsilon, target)?
    };
    Ok(GeometrySummary {
        min_scal,
        volume_uprime: volume_uprime(&t.curve),
        volume_u,
        diam_upper: t.diam_upper(),
        neck_area: t.neck_area(),
        vol_bound_ok: ok,
        epsilon,
        vol_target: target,
        delta0_for_bound,
    })
}

fn largest_delta0_for_bound(t: &TunnelSurface, eps: f64, target: f64) -> Result<Option<f64>> {
    let holds = |d0: f64| -> Result<bool> {
        let s = TunnelSurface::build(t.ambient_curvature, t.delta, d0, t.options)?;
        Ok(within(s.volume_u(), target, eps))
    };
    let mut hi = t.delta / 10.0;
    if holds(hi)? {
        return Ok(Some(hi));
    }
    let mut lo = hi;
    let mut found = false;
    for _ in 0..40 {
        lo /= 2.0;
        if holds(lo)? {
            found = true;
            break;
        }
    }
    if !found {
        return Ok(None);
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(lo))
}

/// Tunnel traversal cost `h(δ) = πδ + δ + 2L(δ0)` with `δ0 = δ/10`.
pub fn h_delta(ambient_curvature: f64, delta: f64, options: &TunnelOptions) -> Result<f64> {
    Ok(TunnelSurface::build(ambient_curvature, delta, delta / 10.0, *options)?.diam_upper())
}
