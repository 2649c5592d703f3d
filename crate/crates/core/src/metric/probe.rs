use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::space::FiniteMetricSpace;
use crate::error::{Error, Result};

/// Least number of points, besides the centre, a probe ball must hold.
pub const MIN_BALL_POINTS: usize = 50;

/// Euclidean ball volume `(4/3)πr³`.
pub fn euclidean_ball_volume(r: f64) -> f64 {
    4.0 / 3.0 * PI * r * r * r
}

/// Volume-deficit table of the scalar-curvature probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub radii: Vec<f64>,
    pub ball_vol: Vec<f64>,
    /// `(V_E(r) − ball_vol) / (r² V_E(r))`.
    pub ratio: Vec<f64>,
    /// `30 · ratio`.
    pub scal_est: Vec<f64>,
    /// Mean number of points in the ball, the centre excluded.
    pub counts: Vec<f64>,
    /// Number of centres averaged.
    pub centers: usize,
}

impl ProbeReport {
    fn from_volumes(radii: &[f64], ball_vol: Vec<f64>, counts: Vec<f64>, centers: usize) -> Self {
        let ratio: Vec<f64> = radii
            .iter()
            .zip(&ball_vol)
            .map(|(&r, &v)| {
                let ve = euclidean_ball_volume(r);
                (ve - v) / (r * r * ve)
            })
            .collect();
        let scal_est = ratio.iter().map(|q| 30.0 * q).collect();
        ProbeReport {
            radii: radii.to_vec(),
            ball_vol,
            ratio,
            scal_est,
            counts,
            centers,
        }
    }

    /// CSV with header `r,ball_vol,ratio,scal_est`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,ball_vol,ratio,scal_est\n");
        for i in 0..self.radii.len() {
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.radii[i], self.ball_vol[i], self.ratio[i], self.scal_est[i]
            );
        }
        out
    }
}

fn validate_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::invalid("radii", "no radii given"));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::invalid("radii", format!("{r} is not positive")));
    }
    Ok(())
}

/// Weight and count of each closed ball around `p`, the centre excluded.
fn ball_sums(x: &FiniteMetricSpace, p: usize, radii: &[f64]) -> (Vec<f64>, Vec<usize>) {
    // Bin each point by the smallest radius whose ball holds it, then
    // accumulate over radii in increasing order.
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    let sorted: Vec<f64> = order.iter().map(|&t| radii[t]).collect();
    let rmax = sorted[sorted.len() - 1];
    let mut bin_vol = vec![0.0; radii.len() + 1];
    let mut bin_cnt = vec![0usize; radii.len() + 1];
    for i in 0..x.n() {
        if i == p {
            continue;
        }
        let d = x.d(p, i);
        if d > rmax {
            continue;
        }
        let b = sorted.partition_point(|&r| r < d);
        bin_vol[b] += x.weight[i];
        bin_cnt[b] += 1;
    }
    let mut vol = vec![0.0; radii.len()];
    let mut cnt = vec![0usize; radii.len()];
    let (mut acc_v, mut acc_c) = (0.0, 0);
    for (b, &t) in order.iter().enumerate() {
        acc_v += bin_vol[b];
        acc_c += bin_cnt[b];
        vol[t] = acc_v;
        cnt[t] = acc_c;
    }
    (vol, cnt)
}

/// Probes the volume deficit of balls around `p`.
///
/// The centre's own atom is left out and the rest rescaled by
/// `W / (W − w_p)`, which makes the ball volume unbiased for a uniform sample.
/// Keeping the atom inflates every ball by `w_p`, and the probe divides the
/// deficit by `r²`, so at `N = 20000`, `r = 0.3` the atom alone would move the
/// estimate by about half of its value.
pub fn scalar_probe(x: &FiniteMetricSpace, p: usize, radii: &[f64]) -> Result<ProbeReport> {
    validate_radii(radii)?;
    if p >= x.n() {
        return Err(Error::invalid("p", format!("index {p} out of range")));
    }
    let (vol, cnt) = ball_sums(x, p, radii);
    for (t, &c) in cnt.iter().enumerate() {
        if c < MIN_BALL_POINTS {
            return Err(Error::BelowResolution {
                radius: radii[t],
                count: c,
                required: MIN_BALL_POINTS,
            });
        }
    }
    let total = x.total_weight();
    let scale = total / (total - x.weight[p]);
    let vol = vol.into_iter().map(|v| v * scale).collect();
    let counts = cnt.into_iter().map(|c| c as f64).collect();
    Ok(ProbeReport::from_volumes(radii, vol, counts, 1))
}

/// [`scalar_probe`] averaged over several centres.
///
/// Ball volumes and counts are averaged first and the deficit is taken of the
/// mean volume. The resolution guard applies to the mean count.
pub fn scalar_probe_mean(
    x: &FiniteMetricSpace,
    centers: &[usize],
    radii: &[f64],
) -> Result<ProbeReport> {
    validate_radii(radii)?;
    if centers.is_empty() {
        return Err(Error::invalid("centers", "no centres given"));
    }
    if let Some(&p) = centers.iter().find(|&&p| p >= x.n()) {
        return Err(Error::invalid("centers", format!("index {p} out of range")));
    }
    let total = x.total_weight();
    let all = centers.len() == x.n() && centers.iter().enumerate().all(|(t, &p)| t == p);
    if all {
        return all_centers_probe(x, radii, total);
    }
    let per_center: Vec<(Vec<f64>, Vec<usize>)> = centers
        .par_iter()
        .map(|&p| {
            let (v, c) = ball_sums(x, p, radii);
            let scale = total / (total - x.weight[p]);
            (v.into_iter().map(|v| v * scale).collect(), c)
        })
        .collect();
    let m = centers.len() as f64;
    let mut vol = vec![0.0; radii.len()];
    let mut cnt = vec![0.0; radii.len()];
    for (v, c) in &per_center {
        for t in 0..radii.len() {
            vol[t] += v[t];
            cnt[t] += c[t] as f64;
        }
    }
    for t in 0..radii.len() {
        vol[t] /= m;
        cnt[t] /= m;
        if cnt[t] < MIN_BALL_POINTS as f64 {
            return Err(Error::BelowResolution {
                radius: radii[t],
                count: cnt[t] as usize,
                required: MIN_BALL_POINTS,
            });
        }
    }
    Ok(ProbeReport::from_volumes(radii, vol, cnt, centers.len()))
}

/// Mean over every point as centre, from one pass over the upper triangle.
fn all_centers_probe(x: &FiniteMetricSpace, radii: &[f64], total: f64) -> Result<ProbeReport> {
    let n = x.n();
    let mut order: Vec<usize> = (0..radii.len()).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]));
    let sorted: Vec<f64> = order.iter().map(|&t| radii[t]).collect();
    let scale: Vec<f64> = x.weight.iter().map(|w| total / (total - w)).collect();
    let rmax = sorted[sorted.len() - 1];
    let nb = radii.len() + 1;
    let rows: Vec<(Vec<f64>, Vec<u64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut v = vec![0.0; nb];
            let mut c = vec![0u64; nb];
            for (t, &d) in x.dist.upper_row(i).iter().enumerate() {
                if d > rmax {
                    continue;
                }
                let j = i + 1 + t;
                let b = sorted.partition_point(|&r| r < d);
                v[b] += scale[i] * x.weight[j] + scale[j] * x.weight[i];
                c[b] += 2;
            }
            (v, c)
        })
        .collect();
    let mut bin_vol = vec![0.0; nb];
    let mut bin_cnt = vec![0u64; nb];
    for (v, c) in &rows {
        for b in 0..nb {
            bin_vol[b] += v[b];
            bin_cnt[b] += c[b];
        }
    }
    let m = n as f64;
    let mut vol = vec![0.0; radii.len()];
    let mut cnt = vec![0.0; radii.len()];
    let (mut acc_v, mut acc_c) = (0.0, 0u64);
    for (b, &t) in order.iter().enumerate() {
        acc_v += bin_vol[b];
        acc_c += bin_cnt[b];
        vol[t] = acc_v / m;
        cnt[t] = acc_c as f64 / m;
    }
    for t in 0..radii.len() {
        if cnt[t] < MIN_BALL_POINTS as f64 {
            return Err(Error::BelowResolution {
                radius: radii[t],
                count: cnt[t] as usize,
                required: MIN_BALL_POINTS,
            });
        }
    }
    Ok(ProbeReport::from_volumes(radii, vol, cnt, n))
}

/// Inclusive grid `a, a + step, …` up to `b` (with a half-step slack at the end).
pub fn radius_grid(a: f64, b: f64, step: f64) -> Result<Vec<f64>> {
    if !(a > 0.0 && b >= a && step > 0.0) {
        return Err(Error::invalid("r", format!("bad grid {a}:{b}:{step}")));
    }
    let count = ((b - a) / step + 0.5).floor() as usize;
    Ok((0..=count).map(|i| a + i as f64 * step).collect())
}
