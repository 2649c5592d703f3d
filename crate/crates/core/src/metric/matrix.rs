use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Symmetric distance matrix with zero diagonal, stored as the packed strict
/// upper triangle.
///
/// Row `i` of the packed storage holds `d(i, j)` for `j > i`, so rows are
/// contiguous and can be filled in parallel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

fn row_offset(n: usize, i: usize) -> usize {
    // Σ_{r<i} (n − 1 − r)
    i * (2 * n - i - 1) / 2
}

impl DistanceMatrix {
    pub fn zeros(n: usize) -> Self {
        let len = n * n.saturating_sub(1) / 2;
        DistanceMatrix {
            n,
            data: vec![0.0; len],
        }
    }

    /// Fills every entry `(i, j)`, `i < j`, from `f` in parallel over rows.
    pub fn from_fn<F>(n: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let mut m = DistanceMatrix::zeros(n);
        m.rows_mut().into_par_iter().for_each(|(i, row)| {
            for (t, v) in row.iter_mut().enumerate() {
                *v = f(i, i + 1 + t);
            }
        });
        m
    }

    /// Builds the matrix from full rows produced in parallel; only `j > i` is read.
    pub fn from_rows<F>(n: usize, f: F) -> Self
    where
        F: Fn(usize) -> Vec<f64> + Sync,
    {
        let mut m = DistanceMatrix::zeros(n);
        m.rows_mut().into_par_iter().for_each(|(i, row)| {
            let full = f(i);
            row.copy_from_slice(&full[i + 1..]);
        });
        m
    }

    /// Mutable upper-triangle rows `(i, [d(i, i+1), …, d(i, n-1)])`.
    pub fn rows_mut(&mut self) -> Vec<(usize, &mut [f64])> {
        let n = self.n;
        let mut out = Vec::with_capacity(n);
        let mut rest: &mut [f64] = &mut self.data;
        for i in 0..n {
            let (head, tail) = rest.split_at_mut(n - 1 - i);
            out.push((i, head));
            rest = tail;
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => 0.0,
            Less => self.data[row_offset(self.n, i) + j - i - 1],
            Greater => self.data[row_offset(self.n, j) + i - j - 1],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert_ne!(i, j, "diagonal is fixed at zero");
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let k = row_offset(self.n, a) + b - a - 1;
        self.data[k] = v;
    }

    /// Upper-triangle slice of row `i`: `d(i, j)` for `j > i`.
    pub fn upper_row(&self, i: usize) -> &[f64] {
        let o = row_offset(self.n, i);
        &self.data[o..o + self.n - 1 - i]
    }

    /// Copies full row `i` into `out`.
    pub fn row_into(&self, i: usize, out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..i).map(|j| self.get(j, i)));
        out.push(0.0);
        out.extend_from_slice(self.upper_row(i));
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n);
        self.row_into(i, &mut v);
        v
    }

    pub fn max(&self) -> f64 {
        self.data.par_iter().copied().reduce(|| 0.0, f64::max)
    }

    pub fn packed(&self) -> &[f64] {
        &self.data
    }
}
