use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use serde::{Deserialize, Serialize};

use super::template::{smoothstep, TEMPLATE_MEAN};
use crate::error::{Error, Result};

/// Lower end of the admissible open interval for the final-bend coefficient.
pub const ALPHA_BEND_MIN: f64 = (2.0 - SQRT_2) / 2.0;
/// Upper end of the admissible open interval for the final-bend coefficient.
pub const ALPHA_BEND_MAX: f64 = SQRT_2 / 4.0;
/// Default final-bend coefficient.
pub const DEFAULT_ALPHA_BEND: f64 = 0.32;

/// Universal contraction constant bounding `b_i / b_{i-1}` along the induction.
pub fn contraction_constant() -> f64 {
    let phi = -FRAC_PI_4;
    1.0 + 0.25 * (phi + phi.cos() / 8.0).sin()
}

/// Bookkeeping from the inductive bending steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BendRecursion {
    /// Number of inductive steps `n`.
    pub steps: usize,
    /// Heights `b_0, …, b_n` of the curve at `s_0, …, s_n`.
    pub heights: Vec<f64>,
    /// Normal angles `θ_0, …, θ_n`; the last one is exactly π/4.
    pub normal_angles: Vec<f64>,
    /// `b_i / b_{i-1}` for the full-length steps `Δs_i = b_{i-1}/2`, `i = 1..=n`.
    ///
    /// The `n`-th entry is evaluated before the step is cut back to reach π/4.
    pub contraction: Vec<f64>,
    /// `b_n / b_{n-1}` after the last step is cut back; tends to one as the cut grows.
    pub truncated_ratio: f64,
}

/// Piecewise curvature function `k(s)` of the bending curve.
///
/// Segment `j` spans `[s_breaks[j], s_breaks[j+1]]` with length
/// `segment_lengths[j]` and plateau value `k_values[j]`. When
/// `ramp_widths[j] > 0` the curvature leaves `k_values[j-1]` at the start of
/// the segment and reaches the plateau after `ramp_widths[j]` through the
/// smooth template; otherwise it jumps.
///
/// `alpha_bend` is the final-bend coefficient of the construction. The
/// smoothing scale is a separate quantity held in `smooth_width`, although
/// both go by the same Greek letter in the geometric literature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureProfile {
    #[serde(rename = "K")]
    pub ambient_curvature: f64,
    pub delta0: f64,
    /// Running sum of `segment_lengths`, starting at 0. Below one ulp of the
    /// total length consecutive entries can coincide; the lengths are exact.
    pub s_breaks: Vec<f64>,
    pub k_values: Vec<f64>,
    pub alpha_bend: f64,
    pub smooth_width: f64,
    pub beta: f64,
    pub segment_lengths: Vec<f64>,
    pub ramp_widths: Vec<f64>,
    pub recursion: BendRecursion,
}

/// Propagates `(x0, x1, φ)` along a circular arc of curvature `k` and length `len`.
///
/// Uses the chord form, which is exact for every `k` including zero and
/// avoids cancellation when the arc is short.
pub(crate) fn arc_step(x0: f64, x1: f64, phi: f64, k: f64, len: f64) -> (f64, f64, f64) {
    let (dx0, dx1, dphi) = arc_increment(phi, k, len);
    (x0 + dx0, x1 + dx1, phi + dphi)
}

pub(crate) fn arc_increment(phi: f64, k: f64, len: f64) -> (f64, f64, f64) {
    let half = 0.5 * k * len;
    let sinc = if half.abs() < 1e-8 {
        1.0 - half * half / 6.0
    } else {
        half.sin() / half
    };
    let chord = len * sinc;
    let mid = phi + half;
    (chord * mid.cos(), chord * mid.sin(), k * len)
}

/// Builds the step curvature profile of the bending construction.
///
/// The horizontal tail defaults to `delta0 / 10`.
pub fn build_step_profile(
    ambient_curvature: f64,
    delta0: f64,
    alpha_bend: f64,
) -> Result<CurvatureProfile> {
    build_step_profile_with_tail(ambient_curvature, delta0, alpha_bend, delta0 / 10.0)
}

/// Same as [`build_step_profile`] with an explicit horizontal-tail length.
pub fn build_step_profile_with_tail(
    ambient_curvature: f64,
    delta0: f64,
    alpha_bend: f64,
    tail_length: f64,
) -> Result<CurvatureProfile> {
    if !(ambient_curvature > 0.0 && ambient_curvature <= 1.0) {
        return Err(Error::invalid("K", format!("{ambient_curvature} is outside (0, 1]")));
    }
    if !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(Error::invalid("delta0", format!("{delta0} is outside (0, 1)")));
    }
    if !(alpha_bend > ALPHA_BEND_MIN && alpha_bend < ALPHA_BEND_MAX) {
        return Err(Error::invalid(
            "alpha_bend",
            format!("{alpha_bend} is outside ({ALPHA_BEND_MIN:.6}, {ALPHA_BEND_MAX:.6})"),
        ));
    }
    if !(tail_length > 0.0 && tail_length.is_finite()) {
        return Err(Error::invalid("tail_length", "must be positive"));
    }

    let sqrt_k = ambient_curvature.sqrt();
    let s0 = delta0 / 2.0;
    let theta0 = delta0 - sqrt_k * s0;
    if theta0 <= 0.0 {
        return Err(Error::invalid(
            "delta0",
            format!("initial normal angle {theta0} is not positive"),
        ));
    }

    // Initial arc on the δ0-sphere.
    let x1_start = delta0.sin() / sqrt_k;
    let phi_start = -FRAC_PI_2 + delta0;
    let (_, b0, _) = arc_step(0.0, x1_start, phi_start, -sqrt_k, s0);

    let mut lengths = vec![s0];
    let mut k_values = vec![-sqrt_k];
    let mut heights = vec![b0];
    let mut angles = vec![theta0];
    let mut contraction = Vec::new();
    let truncated_ratio;

    let mut theta = theta0;
    let mut b = b0;
    loop {
        let k = theta.sin() / (4.0 * b);
        let full = b / 2.0;
        let phi = theta - FRAC_PI_2;
        let (_, b_full, _) = arc_step(0.0, b, phi, k, full);
        contraction.push(b_full / b);
        let gained = k * full;
        if theta + gained >= FRAC_PI_4 {
            let cut = (FRAC_PI_4 - theta) / k;
            let (_, b_cut, _) = arc_step(0.0, b, phi, k, cut);
            truncated_ratio = b_cut / b;
            lengths.push(cut);
            k_values.push(k);
            heights.push(b_cut);
            angles.push(FRAC_PI_4);
            b = b_cut;
            break;
        }
        theta += gained;
        lengths.push(full);
        k_values.push(k);
        heights.push(b_full);
        angles.push(theta);
        b = b_full;
        if contraction.len() > 100_000 {
            return Err(Error::Construction(
                "bending induction did not reach π/4".into(),
            ));
        }
    }
    let steps = contraction.len();

    // Final bend: θ goes from π/4 to π/2 with curvature α / b_n.
    let k_final = alpha_bend / b;
    lengths.push(FRAC_PI_4 / k_final);
    k_values.push(k_final);

    lengths.push(tail_length);
    k_values.push(0.0);

    let ramp_widths = vec![0.0; lengths.len()];
    Ok(CurvatureProfile {
        ambient_curvature,
        delta0,
        s_breaks: running_sum(&lengths),
        k_values,
        alpha_bend,
        smooth_width: 0.0,
        beta: 0.0,
        segment_lengths: lengths,
        ramp_widths,
        recursion: BendRecursion {
            steps,
            heights,
            normal_angles: angles,
            contraction,
            truncated_ratio,
        },
    })
}

fn running_sum(lengths: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(lengths.len() + 1);
    out.push(0.0);
    for &l in lengths {
        acc += l;
        out.push(acc);
    }
    out
}

/// Replaces every curvature jump by a C∞ ramp of width `smooth_width` and
/// appends a compensating segment that restores a final normal angle of π/2.
///
/// Each increasing jump at the start of a segment becomes a ramp over the
/// first `smooth_width` of that segment. The bend lost to the ramps is made up
/// after `s_{n+1}`, where the curvature decays smoothly from `k_{n+1}` to zero
/// over a width `β` fixed by the angle balance.
pub fn smooth_profile(p: &CurvatureProfile, smooth_width: f64) -> Result<CurvatureProfile> {
    if smooth_width == 0.0 {
        return Ok(p.clone());
    }
    if !(smooth_width > 0.0 && smooth_width.is_finite()) {
        return Err(Error::invalid("smooth_width", "must be non-negative and finite"));
    }
    if p.smooth_width != 0.0 {
        return Err(Error::invalid("profile", "profile is already smoothed"));
    }
    let tail = p.segment_lengths.len() - 1;
    let final_bend = tail - 1;
    let shortest = p.segment_lengths[..tail]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if smooth_width >= shortest {
        return Err(Error::invalid(
            "smooth_width",
            format!("{smooth_width:e} is not below the shortest segment {shortest:e}"),
        ));
    }

    let mut lengths = p.segment_lengths[..=final_bend].to_vec();
    let mut k_values = p.k_values[..=final_bend].to_vec();
    let mut ramps = vec![0.0; lengths.len()];
    for r in ramps.iter_mut().skip(1) {
        *r = smooth_width;
    }

    // θ̄(s_{n+1}) from the exact segment integrals.
    let theta_start = p.delta0;
    let turned: f64 = (0..lengths.len())
        .map(|j| segment_integral(&k_values, &lengths, &ramps, j))
        .sum();
    let deficit = FRAC_PI_2 - (theta_start + turned);
    let k_final = k_values[final_bend];
    if !(deficit > 0.0) {
        return Err(Error::Construction(format!(
            "smoothing produced no bend deficit ({deficit:e})"
        )));
    }
    // ∫₀^β k_{n+1}(1 − g(u/β)) du = k_{n+1} β (1 − mean g).
    let beta = deficit / (k_final * (1.0 - TEMPLATE_MEAN));
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::Construction(format!("compensation width {beta:e} is invalid")));
    }
    if beta > lengths[final_bend] {
        return Err(Error::Construction(format!(
            "compensation width {beta:e} exceeds the final bend {:e}; smooth_width is too large",
            lengths[final_bend]
        )));
    }
    lengths.push(beta);
    k_values.push(0.0);
    ramps.push(beta);

    lengths.push(p.segment_lengths[tail]);
    k_values.push(0.0);
    ramps.push(0.0);

    Ok(CurvatureProfile {
        s_breaks: running_sum(&lengths),
        k_values,
        smooth_width,
        beta,
        segment_lengths: lengths,
        ramp_widths: ramps,
        ..p.clone()
    })
}

fn segment_integral(k_values: &[f64], lengths: &[f64], ramps: &[f64], j: usize) -> f64 {
    let len = lengths[j];
    let w = ramps[j];
    let k = k_values[j];
    if w > 0.0 && j > 0 {
        let prev = k_values[j - 1];
        k * len - (k - prev) * w * (1.0 - TEMPLATE_MEAN)
    } else {
        k * len
    }
}

impl CurvatureProfile {
    pub fn segment_count(&self) -> usize {
        self.segment_lengths.len()
    }

    pub fn total_length(&self) -> f64 {
        self.segment_lengths.iter().sum()
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth_width > 0.0
    }

    /// Index of the horizontal tail segment.
    pub fn tail_segment(&self) -> usize {
        self.segment_lengths.len() - 1
    }

    /// Curvature at local offset `u` inside segment `j`.
    pub fn curvature_in_segment(&self, j: usize, u: f64) -> f64 {
        let w = self.ramp_widths[j];
        let k = self.k_values[j];
        if j > 0 && w > 0.0 && u < w {
            let prev = self.k_values[j - 1];
            prev + (k - prev) * smoothstep(u / w)
        } else {
            k
        }
    }

    /// Curvature at arclength `s` (right-continuous at jumps).
    pub fn curvature_at(&self, s: f64) -> f64 {
        let mut start = 0.0;
        for (j, &len) in self.segment_lengths.iter().enumerate() {
            if s < start + len || j + 1 == self.segment_lengths.len() {
                return self.curvature_in_segment(j, (s - start).max(0.0));
            }
            start += len;
        }
        unreachable!("profile has at least one segment")
    }

    /// Exact `∫ k̄` over segment `j`.
    pub fn segment_turning(&self, j: usize) -> f64 {
        segment_integral(&self.k_values, &self.segment_lengths, &self.ramp_widths, j)
    }

    /// Exact `∫₀ᴸ k̄ ds`.
    pub fn total_turning(&self) -> f64 {
        (0..self.segment_count()).map(|j| self.segment_turning(j)).sum()
    }

    /// Normal angle at `s = 0`.
    pub fn initial_normal_angle(&self) -> f64 {
        self.delta0
    }
}
