//! Symmetric envelope matrices and their Cholesky factorization.
//!
//! Periodic banded matrices have a full envelope only in their last `b` rows,
//! so factorization costs `O(n b²)`.

use crate::error::{Error, Result};

/// Symmetric matrix storing, for each row `i`, the lower entries `first[i]..=i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkylineMatrix {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineMatrix {
    pub fn with_envelope(first: Vec<usize>) -> Self {
        let mut start = Vec::with_capacity(first.len() + 1);
        let mut acc = 0;
        for (i, &f) in first.iter().enumerate() {
            assert!(f <= i, "envelope must start at or before the diagonal");
            start.push(acc);
            acc += i - f + 1;
        }
        start.push(acc);
        SkylineMatrix { first, start, data: vec![0.0; acc] }
    }

    pub fn dense(n: usize) -> Self {
        Self::with_envelope(vec![0; n])
    }

    /// Envelope of a periodic matrix with half-bandwidth `b` (wrap-around included).
    pub fn periodic_band(n: usize, b: usize) -> Self {
        let first = (0..n).map(|i| if i + b >= n { 0 } else { i.saturating_sub(b) }).collect();
        Self::with_envelope(first)
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    fn index(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if j < self.first[i] {
            None
        } else {
            Some(self.start[i] + j - self.first[i])
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.index(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Adds `v` to entries `(i, j)` and `(j, i)` (once when `i == j`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.index(i, j).unwrap_or_else(|| panic!("entry ({i}, {j}) outside the envelope"));
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let f = self.first[i];
            for (off, &a) in row.iter().enumerate() {
                let j = f + off;
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i).abs()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// `L Lᵀ` factorization; fails on a pivot that is not clearly positive.
    pub fn cholesky(&self) -> Result<Cholesky> {
        let n = self.dim();
        let scale = self.max_abs_diagonal().max(f64::MIN_POSITIVE);
        let mut l = self.clone();
        for i in 0..n {
            let fi = l.first[i];
            for j in fi..=i {
                let fj = l.first[j];
                let k0 = fi.max(fj);
                let ri = &l.data[l.start[i] + k0 - fi..l.start[i] + j - fi];
                let rj = &l.data[l.start[j] + k0 - fj..l.start[j] + j - fj];
                let dot: f64 = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
                let idx = l.start[i] + j - fi;
                let s = l.data[idx] - dot;
                if j < i {
                    let djj = l.data[l.start[j + 1] - 1];
                    l.data[idx] = s / djj;
                } else {
                    if !(s > 1e-13 * scale) {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                    }
                    l.data[idx] = s.sqrt();
                }
            }
        }
        Ok(Cholesky { l })
    }
}

/// Lower-triangular Cholesky factor sharing the envelope of the source matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: SkylineMatrix,
}

impl Cholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.l;
        let n = l.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = l.first[i];
            let row = &l.data[l.start[i]..l.start[i + 1]];
            let dot: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - dot) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = l.first[i];
            let row = &l.data[l.start[i]..l.start[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (off, &a) in row[..i - fi].iter().enumerate() {
                y[fi + off] -= a * xi;
            }
        }
        y
    }
}
