use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::DistanceMatrix;
use crate::error::{Error, Result};

/// Point tags stored in [`FiniteMetricSpace::labels`].
pub mod tags {
    /// Ordinary sample point carrying volume.
    pub const SAMPLE: u32 = 0;
    /// Zero-weight node placed on the marked curve.
    pub const CURVE: u32 = 1;
    /// The point a set was pulled to.
    pub const PULLED: u32 = 2;
}

/// Finite metric space with a measure given by per-point weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    pub dist: DistanceMatrix,
    pub weight: Vec<f64>,
    /// Ambient coordinates in ℝ⁴ for sphere samples.
    pub coords: Option<Vec<[f64; 4]>>,
    /// Curvature `K` of the round sphere the coordinates live on, when the
    /// distances are its geodesic distances.
    pub sphere_curvature: Option<f64>,
    pub labels: Vec<u32>,
}

/// Result of [`FiniteMetricSpace::check_metric`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricCheck {
    pub triples_checked: u64,
    pub exhaustive: bool,
    pub violations: u64,
    /// Largest `d(x,z) − d(x,y) − d(y,z)` seen (≤ 0 when none).
    pub max_excess: f64,
    pub tolerance: f64,
    pub negative_entries: u64,
    pub nonfinite_entries: u64,
}

impl MetricCheck {
    pub fn ok(&self) -> bool {
        self.violations == 0 && self.negative_entries == 0 && self.nonfinite_entries == 0
    }
}

/// Largest point count for which all triples are enumerated.
pub const EXHAUSTIVE_LIMIT: usize = 300;
/// Triples sampled when the space is larger than [`EXHAUSTIVE_LIMIT`].
pub const SAMPLED_TRIPLES: u64 = 1_000_000;

impl FiniteMetricSpace {
    pub fn new(dist: DistanceMatrix, weight: Vec<f64>) -> Result<Self> {
        let n = dist.n();
        if weight.len() != n {
            return Err(Error::invalid(
                "weight",
                format!("{} weights for {n} points", weight.len()),
            ));
        }
        if weight.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::invalid("weight", "weights must be finite and nonnegative"));
        }
        Ok(FiniteMetricSpace {
            dist,
            weight,
            coords: None,
            sphere_curvature: None,
            labels: vec![tags::SAMPLE; n],
        })
    }

    pub fn n(&self) -> usize {
        self.dist.n()
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist.get(i, j)
    }

    pub fn total_weight(&self) -> f64 {
        self.weight.iter().sum()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.max()
    }

    /// Diameter of a subset.
    pub fn subset_diameter(&self, idx: &[usize]) -> f64 {
        idx.par_iter()
            .enumerate()
            .map(|(a, &i)| {
                idx[a + 1..]
                    .iter()
                    .map(|&j| self.d(i, j))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Weight of the closed ball `{i : d(p, i) ≤ r}`.
    pub fn ball_volume(&self, p: usize, r: f64) -> Result<f64> {
        if p >= self.n() {
            return Err(Error::invalid("p", format!("index {p} out of range")));
        }
        if !(r >= 0.0) {
            return Err(Error::invalid("r", format!("{r} is negative")));
        }
        Ok((0..self.n())
            .filter(|&i| self.d(p, i) <= r)
            .map(|i| self.weight[i])
            .sum())
    }

    /// Number of points in the closed ball.
    pub fn ball_count(&self, p: usize, r: f64) -> usize {
        (0..self.n()).filter(|&i| self.d(p, i) <= r).count()
    }

    /// Checks nonnegativity, finiteness and the triangle inequality up to
    /// `rel_tol · Diam`. Small spaces are checked on every triple, larger ones
    /// on [`SAMPLED_TRIPLES`] triples drawn from a generator seeded with `seed`.
    pub fn check_metric(&self, rel_tol: f64, seed: u64) -> MetricCheck {
        let n = self.n();
        let packed = self.dist.packed();
        let negative_entries = packed.iter().filter(|&&v| v < 0.0).count() as u64;
        let nonfinite_entries = packed.iter().filter(|v| !v.is_finite()).count() as u64;
        let tol = rel_tol * self.diameter();
        let excess = |x: usize, y: usize, z: usize| self.d(x, z) - self.d(x, y) - self.d(y, z);
        let (checked, violations, max_excess, exhaustive) = if n <= EXHAUSTIVE_LIMIT {
            let (v, m) = (0..n)
                .into_par_iter()
                .map(|x| {
                    let mut v = 0u64;
                    let mut m = f64::NEG_INFINITY;
                    for y in 0..n {
                        for z in 0..n {
                            let e = excess(x, y, z);
                            m = m.max(e);
                            if e > tol {
                                v += 1;
                            }
                        }
                    }
                    (v, m)
                })
                .reduce(|| (0, f64::NEG_INFINITY), |a, b| (a.0 + b.0, a.1.max(b.1)));
            ((n as u64).pow(3), v, m, true)
        } else {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let mut v = 0u64;
            let mut m = f64::NEG_INFINITY;
            for _ in 0..SAMPLED_TRIPLES {
                let (x, y, z) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                let e = excess(x, y, z);
                m = m.max(e);
                if e > tol {
                    v += 1;
                }
            }
            (SAMPLED_TRIPLES, v, m, false)
        };
        MetricCheck {
            triples_checked: checked,
            exhaustive,
            violations,
            max_excess: if n == 0 { 0.0 } else { max_excess },
            tolerance: tol,
            negative_entries,
            nonfinite_entries,
        }
    }

    /// Index of the point nearest to `x` in ambient coordinates (largest dot product).
    pub fn nearest_by_coords(&self, x: &[f64; 4]) -> Option<usize> {
        let coords = self.coords.as_ref()?;
        coords
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c[0] * x[0] + c[1] * x[1] + c[2] * x[2] + c[3] * x[3]))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
    }
}

/// Random finite metric space: shortest-path closure of a complete graph with
/// edge lengths uniform in `[0.1, 1]`, uniform weights in `[0, 1]`.
pub fn random_metric_space(n: usize, seed: u64) -> FiniteMetricSpace {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut d = vec![0.0_f64; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(0.1..1.0);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    let weight = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let dist = DistanceMatrix::from_fn(n, |i, j| d[i * n + j]);
    FiniteMetricSpace::new(dist, weight).expect("weights are valid")
}
