//! Piecewise polynomials on unit cells, built exactly in rational arithmetic
//! and evaluated in floating point.

use num::{BigInt, BigRational, One, ToPrimitive, Zero};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact piecewise polynomial. Cell `i` covers `[left + i, left + i + 1)` with
/// `left = left_half / 2`; coefficients are in the local variable `t ∈ [0, 1)`.
#[derive(Debug, Clone)]
pub(crate) struct ExactPiecewise {
    left_half: i64,
    pieces: Vec<Vec<BigRational>>,
    tail: BigRational,
}

impl ExactPiecewise {
    /// Indicator of `[−½, ½)`.
    pub(crate) fn unit_box() -> Self {
        ExactPiecewise { left_half: -1, pieces: vec![vec![BigRational::one()]], tail: BigRational::zero() }
    }

    /// Centered cardinal B-spline of the given degree.
    pub(crate) fn bspline(degree: usize) -> Self {
        (0..degree).fold(Self::unit_box(), |b, _| b.smooth())
    }

    /// `x ↦ ∫_{−∞}^x p`.
    pub(crate) fn antiderivative(&self) -> Self {
        let mut acc = BigRational::zero();
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            let mut q = vec![acc.clone()];
            for (i, c) in p.iter().enumerate() {
                q.push(c / rat(i as i64 + 1, 1));
            }
            acc = q.iter().fold(BigRational::zero(), |s, c| s + c);
            pieces.push(q);
        }
        ExactPiecewise { left_half: self.left_half, pieces, tail: acc }
    }

    /// Convolution with the unit box: `x ↦ ∫_{x−½}^{x+½} p`.
    pub(crate) fn smooth(&self) -> Self {
        let a = self.antiderivative();
        let m = a.pieces.len();
        let mut pieces = Vec::with_capacity(m + 1);
        for c in 0..=m {
            let upper = if c < m { a.pieces[c].clone() } else { vec![a.tail.clone()] };
            let lower = if c == 0 { vec![] } else { a.pieces[c - 1].clone() };
            pieces.push(sub(&upper, &lower));
        }
        ExactPiecewise { left_half: self.left_half - 1, pieces, tail: BigRational::zero() }
    }

    /// `Σ_k w_k p(x − k)` for integer shifts `k`.
    pub(crate) fn shifted_sum(&self, weights: &[(i64, BigRational)]) -> Self {
        let lo = weights.iter().map(|(k, _)| *k).min().unwrap_or(0);
        let hi = weights.iter().map(|(k, _)| *k).max().unwrap_or(0);
        let m = self.pieces.len();
        let count = m + (hi - lo) as usize;
        let mut pieces = vec![Vec::new(); count];
        let mut tail = BigRational::zero();
        for (k, w) in weights {
            let off = (k - lo) as usize;
            for (i, p) in self.pieces.iter().enumerate() {
                pieces[off + i] = add(&pieces[off + i], &scale(p, w));
            }
            for piece in pieces.iter_mut().skip(off + m) {
                *piece = add(piece, &[self.tail.clone() * w]);
            }
            tail += self.tail.clone() * w;
        }
        ExactPiecewise { left_half: self.left_half + 2 * lo, pieces, tail }
    }

    pub(crate) fn to_float(&self) -> PiecewisePoly {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let mut v: Vec<f64> = p.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
                while v.len() > 1 && v.last() == Some(&0.0) {
                    v.pop();
                }
                if v.is_empty() {
                    v.push(0.0);
                }
                v
            })
            .collect();
        PiecewisePoly { left: self.left_half as f64 / 2.0, pieces, tail: self.tail.to_f64().unwrap_or(f64::NAN) }
    }
}

fn add(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(BigRational::zero);
            let y = b.get(i).cloned().unwrap_or_else(BigRational::zero);
            x + y
        })
        .collect()
}

fn sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let neg: Vec<BigRational> = b.iter().map(|c| -c.clone()).collect();
    add(a, &neg)
}

fn scale(a: &[BigRational], w: &BigRational) -> Vec<BigRational> {
    a.iter().map(|c| c * w).collect()
}

/// Discrete self-convolution of a symmetric integer-indexed stencil.
pub(crate) fn self_convolve(c: &[(i64, BigRational)]) -> Vec<(i64, BigRational)> {
    let mut out: Vec<(i64, BigRational)> = Vec::new();
    for (j, a) in c {
        for (l, b) in c {
            let k = j + l;
            match out.iter_mut().find(|(kk, _)| *kk == k) {
                Some((_, v)) => *v += a * b,
                None => out.push((k, a * b)),
            }
        }
    }
    out.sort_by_key(|(k, _)| *k);
    out
}

pub(crate) fn rational(n: i64, d: i64) -> BigRational {
    rat(n, d)
}

/// Floating-point piecewise polynomial on unit cells `[left + i, left + i + 1)`.
/// Left of the first cell the value is 0; right of the last it is `tail`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    left: f64,
    pieces: Vec<Vec<f64>>,
    tail: f64,
}

impl PiecewisePoly {
    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.left + self.pieces.len() as f64
    }

    pub fn degree(&self) -> usize {
        self.pieces.iter().map(|p| p.len().saturating_sub(1)).max().unwrap_or(0)
    }

    /// Value of the `j`-th derivative at `x`.
    pub fn eval(&self, x: f64, j: usize) -> f64 {
        if x < self.left {
            return 0.0;
        }
        let s = x - self.left;
        let cell = s.floor();
        if cell >= self.pieces.len() as f64 {
            return if j == 0 { self.tail } else { 0.0 };
        }
        horner_derivative(&self.pieces[cell as usize], s - cell, j)
    }
}

/// `d^j/dt^j Σ c_i t^i`.
pub(crate) fn horner_derivative(c: &[f64], t: f64, j: usize) -> f64 {
    if j >= c.len() {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in (j..c.len()).rev() {
        let f = ((i - j + 1)..=i).fold(1.0, |p, k| p * k as f64);
        acc = acc * t + c[i] * f;
    }
    acc
}
