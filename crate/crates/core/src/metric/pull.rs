use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix::DistanceMatrix;
use super::space::{tags, FiniteMetricSpace};
use crate::error::{Error, Result};

/// Quotient of a space by a subset collapsed to one point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulledSpace {
    pub space: FiniteMetricSpace,
    /// Index in `space` of every original point; members of the pulled set map to `p0`.
    pub map: Vec<usize>,
    /// Index of the pulled point in `space`.
    pub p0: usize,
    /// Original indices of the pulled set, sorted.
    pub pulled: Vec<usize>,
}

/// Collapses `k_idx` to the single point `p0`.
///
/// Output points are the originals outside `k_idx`, in their original order,
/// with `p0` kept at its own position. Distances are
/// `d_Y(x, p0) = min_{y∈K} d(x, y)` and
/// `d_Y(x1, x2) = min(d(x1, x2), d_Y(x1, p0) + d_Y(x2, p0))`.
/// The pulled point has weight zero and the weights of `K` are dropped.
pub fn pull_set(x: &FiniteMetricSpace, k_idx: &[usize], p0: usize) -> Result<PulledSpace> {
    let n = x.n();
    if k_idx.is_empty() {
        return Err(Error::invalid("K_idx", "pulled set is empty"));
    }
    if let Some(&bad) = k_idx.iter().find(|&&i| i >= n) {
        return Err(Error::invalid("K_idx", format!("index {bad} out of range")));
    }
    let mut in_k = vec![false; n];
    for &i in k_idx {
        in_k[i] = true;
    }
    if p0 >= n || !in_k[p0] {
        return Err(Error::invalid("p0", format!("{p0} is not in the pulled set")));
    }
    let pulled: Vec<usize> = (0..n).filter(|&i| in_k[i]).collect();

    // Distance of every original point to the set.
    let to_set: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            if in_k[i] {
                0.0
            } else {
                pulled.iter().map(|&y| x.d(i, y)).fold(f64::INFINITY, f64::min)
            }
        })
        .collect();

    let kept: Vec<usize> = (0..n).filter(|&i| !in_k[i] || i == p0).collect();
    let mut map = vec![0; n];
    let mut new_p0 = 0;
    for (t, &i) in kept.iter().enumerate() {
        map[i] = t;
        if i == p0 {
            new_p0 = t;
        }
    }
    for &i in &pulled {
        map[i] = new_p0;
    }

    let m = kept.len();
    let dist = DistanceMatrix::from_fn(m, |a, b| {
        let (i, j) = (kept[a], kept[b]);
        if i == p0 {
            to_set[j]
        } else if j == p0 {
            to_set[i]
        } else {
            x.d(i, j).min(to_set[i] + to_set[j])
        }
    });
    let weight = kept
        .iter()
        .map(|&i| if i == p0 { 0.0 } else { x.weight[i] })
        .collect();
    let mut space = FiniteMetricSpace::new(dist, weight)?;
    space.coords = x
        .coords
        .as_ref()
        .map(|c| kept.iter().map(|&i| c[i]).collect());
    space.labels = kept
        .iter()
        .map(|&i| if i == p0 { tags::PULLED } else { x.labels[i] })
        .collect();
    Ok(PulledSpace {
        space,
        map,
        p0: new_p0,
        pulled,
    })
}
