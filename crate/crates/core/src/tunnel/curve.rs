use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::profile::{arc_increment, CurvatureProfile};
use super::template::gauss_legendre;
use crate::error::{Error, Result};

/// Every constant or ramp piece is split into at least this many sub-intervals.
pub const MIN_SUBSTEPS: usize = 16;

/// Largest incoming `|φ|` for which the straight tail is snapped to `φ = 0`.
pub const HORIZONTAL_SNAP: f64 = 1e-9;

/// Sampled arclength-parametrized plane curve `γ(s) = (x0(s), x1(s))`.
///
/// Besides absolute values the curve keeps per-sample increments `ds`, `dx0`,
/// `dx1` (entry `i` is the change from sample `i-1` to sample `i`, entry 0 is
/// zero). Near the end of the bending induction the pieces are far shorter
/// than one ulp of the absolute arclength, so local checks use the increments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneCurve {
    pub s: Vec<f64>,
    pub x0: Vec<f64>,
    pub x1: Vec<f64>,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    /// Curvature at each sample. Where the step profile jumps the larger of
    /// the one-sided values is stored.
    pub k: Vec<f64>,
    pub ds: Vec<f64>,
    pub dx0: Vec<f64>,
    pub dx1: Vec<f64>,
    #[serde(rename = "L")]
    pub length: f64,
    /// Sample indices of `s_0, …, s_{n+1}` followed by the start of the horizontal tail.
    pub milestones: Vec<usize>,
}

/// Initial point and tangent angle of an integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveStart {
    pub x0: f64,
    pub x1: f64,
    pub phi: f64,
}

impl CurveStart {
    /// Point on the `δ0`-sphere with almost vertical downward tangent.
    pub fn for_profile(p: &CurvatureProfile) -> Self {
        CurveStart {
            x0: 0.0,
            x1: p.delta0.sin() / p.ambient_curvature.sqrt(),
            phi: -FRAC_PI_2 + p.delta0,
        }
    }
}

fn push_sample(c: &mut PlaneCurve, ds: f64, inc: [f64; 2], at: [f64; 3], k: f64) {
    let last = c.s.len() - 1;
    c.s.push(c.s[last] + ds);
    c.x0.push(at[0]);
    c.x1.push(at[1]);
    c.phi.push(at[2]);
    c.theta.push(at[2] + FRAC_PI_2);
    c.k.push(k);
    c.ds.push(ds);
    c.dx0.push(inc[0]);
    c.dx1.push(inc[1]);
}

/// `(cos(a + t) − cos a, sin(a + t) − sin a)` without cancellation.
fn rotation_delta(a: f64, t: f64) -> (f64, f64) {
    let h = 0.5 * t;
    let s = 2.0 * h.sin();
    (-s * (a + h).sin(), s * (a + h).cos())
}

fn substeps(len: f64, step: f64) -> usize {
    let m = (len / step).ceil();
    if m.is_finite() && m > MIN_SUBSTEPS as f64 {
        m as usize
    } else {
        MIN_SUBSTEPS
    }
}

/// Integrates the profile from the standard starting point on the `δ0`-sphere.
pub fn integrate_curve(p: &CurvatureProfile, step: f64) -> Result<PlaneCurve> {
    integrate_curve_from(p, step, CurveStart::for_profile(p))
}

/// Integrates `φ' = k̄`, `γ' = (cos φ, sin φ)` from an explicit start.
///
/// The curve is carried as a reference step curve, in which every ramp is
/// replaced by a jump, plus a perturbation driven by the angle lag
/// `δφ = φ̄ − φ_ref`. The reference is propagated by exact circular arcs
/// anchored at each segment start, so its heights agree with the bending
/// recursion to rounding relative to the current height. The perturbation is
/// integrated from `cos(φ + δφ) − cos φ` in product form with nested
/// five-point Gauss–Legendre rules on ramps and in closed form on plateaus.
/// Summing absolute positions directly would leave an error of one ulp of
/// the starting height, which exceeds the neck height once `δ0 ≲ 0.005`.
pub fn integrate_curve_from(
    p: &CurvatureProfile,
    step: f64,
    start: CurveStart,
) -> Result<PlaneCurve> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid("step", format!("{step} is not positive")));
    }
    let mut c = PlaneCurve {
        s: vec![0.0],
        x0: vec![start.x0],
        x1: vec![start.x1],
        phi: vec![start.phi],
        theta: vec![start.phi + FRAC_PI_2],
        k: vec![p.curvature_in_segment(0, 0.0)],
        ds: vec![0.0],
        dx0: vec![0.0],
        dx1: vec![0.0],
        length: p.total_length(),
        milestones: Vec::new(),
    };
    // Reference state at the current segment start.
    let (mut rx0, mut rx1, mut rphi) = (start.x0, start.x1, start.phi);
    // Perturbation: position offset and angle lag.
    let (mut e0, mut e1, mut lag) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut segment_ends = Vec::with_capacity(p.segment_count());
    for j in 0..p.segment_count() {
        let len = p.segment_lengths[j];
        let w = if j > 0 { p.ramp_widths[j].min(len) } else { 0.0 };
        let kj = p.k_values[j];
        if w == 0.0 {
            let last = c.k.len() - 1;
            c.k[last] = c.k[last].max(kj);
        }
        // A straight final piece that starts horizontal is laid out exactly
        // horizontal. Otherwise an angle rounding error of 1e-15 over a tail of
        // length δ0/10 moves x1 by more than the neck height for small δ0.
        if j + 1 == p.segment_count() && kj == 0.0 && w == 0.0 && (rphi + lag).abs() < HORIZONTAL_SNAP
        {
            rphi = 0.0;
            lag = 0.0;
        }
        if w > 0.0 {
            let m = substeps(w, step);
            let h = w / m as f64;
            let dk = |u: f64| p.curvature_in_segment(j, u) - kj;
            for i in 0..m {
                let ua = i as f64 * h;
                let ub = if i + 1 == m { w } else { ua + h };
                let lag_a = lag;
                let lag_at = |u: f64| lag_a + gauss_legendre(dk, ua, u);
                let de0 = gauss_legendre(|u| rotation_delta(rphi + kj * u, lag_at(u)).0, ua, ub);
                let de1 = gauss_legendre(|u| rotation_delta(rphi + kj * u, lag_at(u)).1, ua, ub);
                lag = lag_a + gauss_legendre(dk, ua, ub);
                let (r0, r1, _) = arc_increment(rphi + kj * ua, kj, ub - ua);
                let (c0, c1, cphi) = arc_increment(rphi, kj, ub);
                e0 += de0;
                e1 += de1;
                push_sample(
                    &mut c,
                    ub - ua,
                    [r0 + de0, r1 + de1],
                    [rx0 + c0 + e0, rx1 + c1 + e1, rphi + cphi + lag],
                    kj + dk(ub),
                );
            }
        }
        let rest = len - w;
        if rest > 0.0 {
            let m = substeps(rest, step);
            let h = rest / m as f64;
            for i in 1..=m {
                let ua = w + (i - 1) as f64 * h;
                let ub = if i == m { len } else { w + i as f64 * h };
                let (r0, r1, _) = arc_increment(rphi + kj * ua, kj, ub - ua);
                let half = 0.5 * kj * (ub - ua);
                let chord = r0.hypot(r1);
                let (q0, q1) = rotation_delta(rphi + kj * ua + half, lag);
                let (de0, de1) = (chord * q0, chord * q1);
                let (c0, c1, cphi) = arc_increment(rphi, kj, ub);
                e0 += de0;
                e1 += de1;
                push_sample(
                    &mut c,
                    ub - ua,
                    [r0 + de0, r1 + de1],
                    [rx0 + c0 + e0, rx1 + c1 + e1, rphi + cphi + lag],
                    kj,
                );
            }
        }
        let (c0, c1, cphi) = arc_increment(rphi, kj, len);
        rx0 += c0;
        rx1 += c1;
        rphi += cphi;
        segment_ends.push(c.s.len() - 1);
    }
    let tail = p.tail_segment();
    let steps = p.recursion.steps;
    let mut milestones: Vec<usize> = segment_ends
        .iter()
        .copied()
        .take((steps + 2).min(tail))
        .collect();
    if tail > 0 {
        milestones.push(segment_ends[tail - 1]);
    }
    c.milestones = milestones;
    Ok(c)
}

/// Bend-condition margins `sin θ / (2 x1) − k` at every sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BendReport {
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub argmin: usize,
}

impl BendReport {
    pub fn holds(&self) -> bool {
        self.min_margin > 0.0
    }
}

pub fn bend_margin(theta: f64, x1: f64, k: f64) -> f64 {
    theta.sin() / (2.0 * x1) - k
}

/// Evaluates the bend condition on every sample.
pub fn verify_bend_condition(c: &PlaneCurve) -> BendReport {
    let margins: Vec<f64> = (0..c.len())
        .map(|i| bend_margin(c.theta[i], c.x1[i], c.k[i]))
        .collect();
    let (argmin, min_margin) = margins
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, m)| if m < acc.1 { (i, m) } else { acc });
    BendReport {
        margins,
        min_margin,
        argmin,
    }
}

/// Geometric shape checks on a sampled curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    /// Largest `| |Δγ| / Δs − 1 |` over consecutive samples.
    pub max_speed_defect: f64,
    /// Largest `|θ − φ − π/2|`.
    pub max_angle_defect: f64,
    pub x1_positive: bool,
    pub x0_increasing: bool,
    /// The larger of `θ − π/2` at the tail start and at `s = L`.
    pub final_theta_error: f64,
    /// Largest `|θ − π/2|` on the horizontal tail.
    pub tail_theta_error: f64,
    /// `φ` never decreases, up to a few ulps, once the curvature is
    /// nonnegative after `s_0`.
    pub phi_monotone: bool,
    /// `x1` never increases up to the start of the tail.
    pub x1_monotone: bool,
}

impl PlaneCurve {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn min_x1(&self) -> f64 {
        self.x1.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn tail_start(&self) -> usize {
        self.milestones.last().copied().unwrap_or(0)
    }

    pub fn shape_report(&self) -> ShapeReport {
        let n = self.len();
        let mut speed = 0.0_f64;
        let mut angle = 0.0_f64;
        for i in 0..n {
            angle = angle.max((self.theta[i] - self.phi[i] - FRAC_PI_2).abs());
            if i > 0 && self.ds[i] > 0.0 {
                let v = self.dx0[i].hypot(self.dx1[i]) / self.ds[i];
                speed = speed.max((v - 1.0).abs());
            }
        }
        let s0 = self.milestones.first().copied().unwrap_or(0);
        // A smoothed profile ramps up from the negative initial curvature, so
        // monotonicity of φ starts once the curvature is nonnegative.
        let mono_start = (s0..n).find(|&i| self.k[i] >= 0.0).unwrap_or(n - 1);
        let tail = self.tail_start();
        let tail_theta_error = self.theta[tail..]
            .iter()
            .map(|t| (t - FRAC_PI_2).abs())
            .fold(0.0, f64::max);
        ShapeReport {
            max_speed_defect: speed,
            max_angle_defect: angle,
            x1_positive: self.x1.iter().all(|&x| x > 0.0),
            x0_increasing: self.dx0[1..].iter().all(|&d| d > 0.0),
            final_theta_error: {
                let a = self.theta[tail] - FRAC_PI_2;
                let b = self.theta[n - 1] - FRAC_PI_2;
                if a.abs() >= b.abs() { a } else { b }
            },
            tail_theta_error,
            phi_monotone: self.phi[mono_start.min(tail)..=tail]
                .windows(2)
                .all(|w| w[1] >= w[0] - 4.0 * f64::EPSILON * w[0].abs()),
            x1_monotone: self.dx1[1..=tail].iter().all(|&d| d <= 0.0),
        }
    }

    /// Linear interpolation of `(x0, x1, θ)` at arclength `s`.
    pub fn interpolate(&self, s: f64) -> (f64, f64, f64) {
        let n = self.len();
        if s <= self.s[0] {
            return (self.x0[0], self.x1[0], self.theta[0]);
        }
        if s >= self.s[n - 1] {
            return (self.x0[n - 1], self.x1[n - 1], self.theta[n - 1]);
        }
        let i = self.s.partition_point(|&v| v <= s);
        let (a, b) = (i - 1, i);
        let span = self.s[b] - self.s[a];
        let t = if span > 0.0 { (s - self.s[a]) / span } else { 0.0 };
        let lerp = |v: &[f64]| v[a] + t * (v[b] - v[a]);
        (lerp(&self.x0), lerp(&self.x1), lerp(&self.theta))
    }

    /// CSV with header `s,x0,x1,phi,theta,k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,x0,x1,phi,theta,k\n");
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.s[i], self.x0[i], self.x1[i], self.phi[i], self.theta[i], self.k[i]
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tunnel::profile::tests_support::single_arc;
    use crate::tunnel::profile::{build_step_profile, smooth_profile};

    #[test]
    fn quarter_circle() {
        let p = single_arc(-1.0, FRAC_PI_2);
        let start = CurveStart { x0: 0.0, x1: 1.0, phi: 0.0 };
        let c = integrate_curve_from(&p, 1e-3, start).unwrap();
        let n = c.len() - 1;
        assert!((c.x0[n] - 1.0).abs() < 1e-13);
        assert!(c.x1[n].abs() < 1e-13);
        for i in 0..c.len() {
            assert!((c.x0[i].hypot(c.x1[i]) - 1.0).abs() < 1e-13);
        }
        // Downward start: the same arc swept clockwise about (-1, 1).
        let down = CurveStart { x0: 0.0, x1: 1.0, phi: -FRAC_PI_2 };
        let c = integrate_curve_from(&p, 1e-3, down).unwrap();
        assert!((c.x0[n] + 1.0).abs() < 1e-13 && c.x1[n].abs() < 1e-13);
    }

    #[test]
    fn step_profile_ends_horizontal() {
        let p = build_step_profile(1.0, 0.01, 0.32).unwrap();
        let c = integrate_curve(&p, 1e-5).unwrap();
        let r = c.shape_report();
        assert!(r.final_theta_error.abs() < 1e-6);
        assert!(r.tail_theta_error < 1e-6);
        assert!(r.x1_positive && r.x0_increasing);
        assert!(r.phi_monotone && r.x1_monotone);
        assert!(r.max_angle_defect < 1e-12);
        assert!(r.max_speed_defect < 1e-3);
        assert!(*c.x1.last().unwrap() > 0.0);
        assert_eq!(c.milestones.len(), p.recursion.steps + 3);
    }

    #[test]
    fn curve_heights_match_recursion() {
        let p = build_step_profile(1.0, 0.03, 0.32).unwrap();
        let c = integrate_curve(&p, 1e-5).unwrap();
        for (i, &b) in p.recursion.heights.iter().enumerate() {
            let x1 = c.x1[c.milestones[i]];
            assert!((x1 - b).abs() <= 1e-9 * b, "b_{i}: {x1} vs {b}");
        }
    }

    #[test]
    fn bend_margin_positive_on_step_profile() {
        let p = build_step_profile(1.0, 0.01, 0.32).unwrap();
        let c = integrate_curve(&p, 1e-5).unwrap();
        assert!(verify_bend_condition(&c).holds());
    }

    #[test]
    fn bend_margin_on_negative_arc() {
        let p = single_arc(-1.0, 0.2);
        let start = CurveStart { x0: 0.0, x1: 0.3_f64.sin(), phi: -FRAC_PI_2 + 0.3 };
        let c = integrate_curve_from(&p, 1e-3, start).unwrap();
        let r = verify_bend_condition(&c);
        for i in 0..c.len() {
            let expect = c.theta[i].sin() / (2.0 * c.x1[i]) + 1.0;
            assert!((r.margins[i] - expect).abs() < 1e-12);
        }
        assert!(r.holds());
    }

    #[test]
    fn smooth_curve_reaches_horizontal() {
        let p = build_step_profile(1.0, 0.1, 0.32).unwrap();
        let shortest = p.segment_lengths.iter().copied().fold(f64::INFINITY, f64::min);
        let q = smooth_profile(&p, 0.1 * shortest).unwrap();
        let c = integrate_curve(&q, 1e-4).unwrap();
        let r = c.shape_report();
        assert!(r.final_theta_error.abs() < 1e-9, "{}", r.final_theta_error);
        assert!(r.x1_positive && r.x0_increasing);
        assert!(verify_bend_condition(&c).holds());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let p = single_arc(0.0, 1.0);
        let c = integrate_curve_from(&p, 0.5, CurveStart { x0: 0.0, x1: 1.0, phi: 0.0 }).unwrap();
        let csv = c.to_csv();
        assert!(csv.starts_with("s,x0,x1,phi,theta,k\n"));
        assert_eq!(csv.lines().count(), c.len() + 1);
    }
}
