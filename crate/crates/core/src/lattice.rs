//! Periodic lattice fields, finite differences and the degree-9 Hermite
//! interpolant Π.

use crate::error::{Error, Result};
use crate::field::{wrap, SmoothField};
use crate::poly::horner_derivative;
use std::sync::OnceLock;

/// Values on the sites `ξ = −N..N−1`, extended 2N-periodically.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicLatticeField {
    n: usize,
    values: Vec<f64>,
}

impl PeriodicLatticeField {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || values.len() != 2 * n {
            return Err(Error::Size(format!("expected 2N = {} values, got {}", 2 * n, values.len())));
        }
        Ok(PeriodicLatticeField { n, values })
    }

    pub fn zeros(n: usize) -> Self {
        PeriodicLatticeField { n, values: vec![0.0; 2 * n] }
    }

    /// Samples `f(ξ)` at every site.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (-(n as i64)..n as i64).map(|xi| f(xi as f64)).collect();
        PeriodicLatticeField { n, values }
    }

    pub fn half_period(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Storage index of site `ξ`.
    pub fn index(&self, xi: i64) -> usize {
        (xi + self.n as i64).rem_euclid(2 * self.n as i64) as usize
    }

    pub fn at(&self, xi: i64) -> f64 {
        self.values[self.index(xi)]
    }

    /// `D_ρ v(ξ) = v(ξ+ρ) − v(ξ)`.
    pub fn finite_difference(&self, rho: i64, xi: i64) -> f64 {
        self.at(xi + rho) - self.at(xi)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_mean_zero(&self) -> bool {
        self.values.iter().sum::<f64>().abs() <= 1e-12 * self.values.len() as f64
    }

    pub fn project_mean_zero(&self) -> Self {
        let m = self.mean();
        PeriodicLatticeField { n: self.n, values: self.values.iter().map(|v| v - m).collect() }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }
}

/// Subtracts the arithmetic mean.
pub fn project_mean_zero(v: &PeriodicLatticeField) -> PeriodicLatticeField {
    v.project_mean_zero()
}

/// Fourth-order difference approximations `(d1, d2, d3, d4)` at site `ξ`.
pub fn pi_derivatives(v: &PeriodicLatticeField, xi: i64) -> Result<[f64; 4]> {
    if v.len() < 7 {
        return Err(Error::Size(format!("Π stencils need 2N ≥ 7, got {}", v.len())));
    }
    let d = |rho: i64| v.finite_difference(rho, xi);
    let d1 = (-d(2) + 8.0 * d(1) - 8.0 * d(-1) + d(-2)) / 12.0;
    let d2 = (-d(2) + 16.0 * d(1) + 16.0 * d(-1) - d(-2)) / 12.0;
    let d3 = (-d(3) + 8.0 * d(2) - 13.0 * d(1) + 13.0 * d(-1) - 8.0 * d(-2) + d(-3)) / 8.0;
    let d4 = (-d(3) + 12.0 * d(2) - 39.0 * d(1) - 39.0 * d(-1) + 12.0 * d(-2) - d(-3)) / 6.0;
    Ok([d1, d2, d3, d4])
}

/// Monomial coefficients of the two-point Hermite basis of degree 9:
/// rows `0..5` match `t^{(j)}` data at 0, rows `5..10` at 1.
fn hermite_basis() -> &'static [[f64; 10]; 10] {
    static BASIS: OnceLock<[[f64; 10]; 10]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mul = |a: &[f64], b: &[f64]| {
            let mut c = vec![0.0; a.len() + b.len() - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    c[i + j] += x * y;
                }
            }
            c
        };
        let pow = |p: &[f64], k: usize| (0..k).fold(vec![1.0], |acc, _| mul(&acc, p));
        let binom = |n: usize, k: usize| (0..k).fold(1.0, |a, i| a * (n - i) as f64 / (i + 1) as f64);
        let fact = |j: usize| (1..=j).fold(1.0, |a, i| a * i as f64);
        let t = [0.0, 1.0];
        let one_minus_t = [1.0, -1.0];
        let t_minus_one = [-1.0, 1.0];
        let mut out = [[0.0; 10]; 10];
        for j in 0..5 {
            let mut s0 = vec![0.0];
            let mut s1 = vec![0.0];
            for k in 0..=(4 - j) {
                let c = binom(4 + k, k);
                let a = pow(&t, k);
                let b = pow(&one_minus_t, k);
                s0.resize(s0.len().max(a.len()), 0.0);
                s1.resize(s1.len().max(b.len()), 0.0);
                for (i, x) in a.iter().enumerate() {
                    s0[i] += c * x;
                }
                for (i, x) in b.iter().enumerate() {
                    s1[i] += c * x;
                }
            }
            let h0 = mul(&mul(&pow(&t, j), &pow(&one_minus_t, 5)), &s0);
            let h1 = mul(&mul(&pow(&t_minus_one, j), &pow(&t, 5)), &s1);
            for (i, c) in h0.iter().enumerate().take(10) {
                out[j][i] = c / fact(j);
            }
            for (i, c) in h1.iter().enumerate().take(10) {
                out[5 + j][i] = c / fact(j);
            }
        }
        out
    })
}

/// Piecewise degree-9 Hermite interpolant matching value and `d1..d4` at sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PiInterpolant {
    n: usize,
    data: Vec<[f64; 5]>,
}

pub fn pi_interpolant(v: &PeriodicLatticeField) -> Result<PiInterpolant> {
    let n = v.half_period() as i64;
    let data = (-n..n)
        .map(|xi| {
            let d = pi_derivatives(v, xi)?;
            Ok([v.at(xi), d[0], d[1], d[2], d[3]])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PiInterpolant { n: v.half_period(), data })
}

impl PiInterpolant {
    /// Nodal data `(v, d1, d2, d3, d4)` at site `ξ`.
    pub fn nodal(&self, xi: i64) -> [f64; 5] {
        let n = self.n as i64;
        self.data[(xi + n).rem_euclid(2 * n) as usize]
    }
}

impl SmoothField for PiInterpolant {
    fn half_period(&self) -> usize {
        self.n
    }

    fn max_order(&self) -> usize {
        9
    }

    fn derivative(&self, j: usize, x: f64) -> f64 {
        let x = wrap(x, self.n);
        let xi = x.floor();
        let t = x - xi;
        let left = self.nodal(xi as i64);
        let right = self.nodal(xi as i64 + 1);
        let basis = hermite_basis();
        (0..5)
            .map(|m| left[m] * horner_derivative(&basis[m], t, j) + right[m] * horner_derivative(&basis[5 + m], t, j))
            .sum()
    }
}

/// Bound `κ` on bond strains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleBound {
    pub kappa: f64,
}

impl AdmissibleBound {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("κ must be positive, got {kappa}")));
        }
        Ok(AdmissibleBound { kappa })
    }

    /// Default `κ = F/4`.
    pub fn from_deformation(f: f64) -> Result<Self> {
        Self::new(f / 4.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub worst_site: i64,
    pub worst_bond: i64,
    pub worst_strain: f64,
}

/// Checks `|D_ρ v(ξ)| ≤ κ` for all sites and `ρ = 1..=r_cut`.
pub fn check_admissible(v: &PeriodicLatticeField, r_cut: usize, bound: AdmissibleBound) -> AdmissibilityReport {
    let n = v.half_period() as i64;
    let mut worst = AdmissibilityReport { admissible: true, worst_site: -n, worst_bond: 1, worst_strain: 0.0 };
    for rho in 1..=r_cut as i64 {
        for xi in -n..n {
            let d = v.finite_difference(rho, xi);
            if d.abs() > worst.worst_strain.abs() {
                worst.worst_site = xi;
                worst.worst_bond = rho;
                worst.worst_strain = d;
            }
        }
    }
    worst.admissible = worst.worst_strain.abs() <= bound.kappa;
    worst
}
