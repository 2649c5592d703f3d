use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::DistanceMatrix;
use super::space::{tags, FiniteMetricSpace};
use crate::error::{Error, Result};

/// Volume of the round 3-sphere of curvature `K`.
pub fn sphere3_volume(ambient_curvature: f64) -> f64 {
    2.0 * PI * PI / ambient_curvature.powf(1.5)
}

#[inline]
pub fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

/// Angle between unit vectors.
///
/// Equal to `arccos⟨a, b⟩` but evaluated as `2 asin(|a − b| / 2)` below a
/// right angle and `π − 2 asin(|a + b| / 2)` above it, which keeps full
/// relative accuracy for nearby and nearly antipodal pairs.
pub fn unit_angle(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let mut m = 0.0;
    let mut p = 0.0;
    for t in 0..4 {
        m += (a[t] - b[t]) * (a[t] - b[t]);
        p += (a[t] + b[t]) * (a[t] + b[t]);
    }
    if m <= p {
        2.0 * (0.5 * m.sqrt()).min(1.0).asin()
    } else {
        PI - 2.0 * (0.5 * p.sqrt()).min(1.0).asin()
    }
}

/// Point of the marked great circle `C(t) = (cos t, sin t, 0, 0)`.
pub fn great_circle_point(t: f64) -> [f64; 4] {
    [t.cos(), t.sin(), 0.0, 0.0]
}

/// Geodesic distance from a unit vector to the marked great circle, in units
/// of the unit sphere.
pub fn angle_to_great_circle(x: &[f64; 4]) -> f64 {
    let rho = x[0].hypot(x[1]);
    let sigma = x[2].hypot(x[3]);
    sigma.atan2(rho)
}

/// Angle from `c` to the shorter great-circle arc joining unit vectors `u` and `v`.
pub fn angle_to_arc(c: &[f64; 4], u: &[f64; 4], v: &[f64; 4]) -> f64 {
    let uv = dot4(u, v);
    let mut e2 = [0.0; 4];
    for t in 0..4 {
        e2[t] = v[t] - uv * u[t];
    }
    let w = dot4(&e2, &e2).sqrt();
    let ends = || unit_angle(c, u).min(unit_angle(c, v));
    if w < 1e-15 {
        return ends();
    }
    for x in e2.iter_mut() {
        *x /= w;
    }
    let span = w.atan2(uv);
    let a = dot4(c, u);
    let b = dot4(c, &e2);
    let phi = b.atan2(a);
    if !(0.0..=span).contains(&phi) {
        return ends();
    }
    let mut perp = 0.0;
    for t in 0..4 {
        let r = c[t] - a * u[t] - b * e2[t];
        perp += r * r;
    }
    perp.sqrt().atan2(a.hypot(b))
}

/// Point at angle `t·a` along the unit-sphere geodesic from the nearest point
/// of the marked great circle to `x`, where `a` is the angle from `x` to the
/// circle. `t = 1` returns `x`, `t = 0` its foot on the circle.
pub fn radial_point(x: &[f64; 4], t: f64) -> [f64; 4] {
    let rho = x[0].hypot(x[1]);
    let sigma = x[2].hypot(x[3]);
    let a = sigma.atan2(rho);
    if sigma == 0.0 {
        return *x;
    }
    let foot = [x[0] / rho, x[1] / rho, 0.0, 0.0];
    let dir = [0.0, 0.0, x[2] / sigma, x[3] / sigma];
    let (s, c) = (t * a).sin_cos();
    let mut out = [0.0; 4];
    for k in 0..4 {
        out[k] = c * foot[k] + s * dir[k];
    }
    out
}

/// Builds the space of the given unit vectors on the sphere of curvature `K`.
pub fn sphere_space(
    coords: Vec<[f64; 4]>,
    weight: Vec<f64>,
    labels: Vec<u32>,
    ambient_curvature: f64,
) -> Result<FiniteMetricSpace> {
    if !(ambient_curvature > 0.0 && ambient_curvature.is_finite()) {
        return Err(Error::invalid("K", format!("{ambient_curvature} is not positive")));
    }
    let n = coords.len();
    if labels.len() != n {
        return Err(Error::invalid("labels", "length differs from point count"));
    }
    let scale = 1.0 / ambient_curvature.sqrt();
    let dist = DistanceMatrix::from_fn(n, |i, j| unit_angle(&coords[i], &coords[j]) * scale);
    let mut x = FiniteMetricSpace::new(dist, weight)?;
    x.coords = Some(coords);
    x.sphere_curvature = Some(ambient_curvature);
    x.labels = labels;
    Ok(x)
}

/// Draws `n` unit vectors by normalizing four standard normal deviates.
///
/// The generator is ChaCha20 (RFC 8439 block function, 20 rounds) keyed by
/// `seed` through `rand_chacha`'s `seed_from_u64`; normal deviates come from
/// the ziggurat sampler of `rand_distr`. Vectors with norm below 1e-12 are
/// redrawn.
pub fn draw_unit_vectors(n: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let mut v = [0.0; 4];
        for c in v.iter_mut() {
            *c = StandardNormal.sample(&mut rng);
        }
        let norm = dot4(&v, &v).sqrt();
        if norm < 1e-12 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= norm;
        }
        out.push(v);
    }
    out
}

/// Seeded uniform sample of the round 3-sphere of curvature `K`.
///
/// Each point carries weight `2π² / (K^{3/2} n)`, so the total weight is the
/// sphere's volume.
pub fn sample_sphere3(n: usize, ambient_curvature: f64, seed: u64) -> Result<FiniteMetricSpace> {
    sample_sphere3_with_curve(n, ambient_curvature, seed, 0)
}

/// [`sample_sphere3`] followed by `curve_nodes` zero-weight points spaced
/// evenly along the great circle `(cos t, sin t, 0, 0)`.
///
/// The curve nodes have indices `n..n + curve_nodes` and label
/// [`tags::CURVE`]. They represent the curve itself and carry no volume.
pub fn sample_sphere3_with_curve(
    n: usize,
    ambient_curvature: f64,
    seed: u64,
    curve_nodes: usize,
) -> Result<FiniteMetricSpace> {
    if n < 10 {
        return Err(Error::invalid("N", format!("{n} is below the minimum of 10")));
    }
    if !(ambient_curvature > 0.0 && ambient_curvature.is_finite()) {
        return Err(Error::invalid("K", format!("{ambient_curvature} is not positive")));
    }
    let mut coords = draw_unit_vectors(n, seed);
    let w = sphere3_volume(ambient_curvature) / n as f64;
    let mut weight = vec![w; n];
    let mut labels = vec![tags::SAMPLE; n];
    for m in 0..curve_nodes {
        let t = 2.0 * PI * m as f64 / curve_nodes as f64;
        coords.push(great_circle_point(t));
        weight.push(0.0);
        labels.push(tags::CURVE);
    }
    sphere_space(coords, weight, labels, ambient_curvature)
}

/// Indices of the points labelled as curve nodes.
pub fn curve_node_indices(x: &FiniteMetricSpace) -> Vec<usize> {
    (0..x.n()).filter(|&i| x.labels[i] == tags::CURVE).collect()
}
