//! Cardinal B-splines, the polynomial-reproducing kernels ζ, the interpolants
//! v̂ and ṽ, the bond weights χ_{ξ,ρ}, and the measurement interpolants.

use crate::error::{Error, Result};
use crate::field::{wrap, SmoothField};
use crate::lattice::{pi_interpolant, PeriodicLatticeField, PiInterpolant};
use crate::linalg::SkylineMatrix;
use crate::poly::{rational, self_convolve, ExactPiecewise, PiecewisePoly};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Centered cardinal B-spline of degree 3, 4 or 5.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineBasis {
    degree: usize,
    poly: PiecewisePoly,
}

impl SplineBasis {
    pub fn get(degree: usize) -> Result<&'static SplineBasis> {
        static B3: OnceLock<SplineBasis> = OnceLock::new();
        static B4: OnceLock<SplineBasis> = OnceLock::new();
        static B5: OnceLock<SplineBasis> = OnceLock::new();
        let cell = match degree {
            3 => &B3,
            4 => &B4,
            5 => &B5,
            _ => return Err(Error::InvalidParameter(format!("spline degree {degree} not in {{3, 4, 5}}"))),
        };
        Ok(cell.get_or_init(|| SplineBasis { degree, poly: ExactPiecewise::bspline(degree).to_float() }))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `(degree + 1) / 2`.
    pub fn support_radius(&self) -> f64 {
        (self.degree + 1) as f64 / 2.0
    }

    pub fn poly(&self) -> &PiecewisePoly {
        &self.poly
    }

    /// `B^{(j)}(x)`, piecewise for `j = degree`.
    pub fn eval(&self, x: f64, j: usize) -> Result<f64> {
        if j > self.degree {
            return Err(Error::UnsupportedOrder(j));
        }
        Ok(self.poly.eval(x, j))
    }
}

pub fn eval_basis(b: &SplineBasis, x: f64, j: usize) -> Result<f64> {
    b.eval(x, j)
}

/// Kernel ζ = Σ_k c_k B(· − k) whose nodal series reproduces polynomials of
/// degree 3 (cubic B) or 5 (quintic B). Carries ζ, its antiderivative and ζ*ζ.
#[derive(Debug, Clone, PartialEq)]
pub struct ReproducingKernel {
    degree: usize,
    zeta: PiecewisePoly,
    antiderivative: PiecewisePoly,
    convolution: PiecewisePoly,
}

impl ReproducingKernel {
    pub fn cubic() -> &'static ReproducingKernel {
        static K: OnceLock<ReproducingKernel> = OnceLock::new();
        K.get_or_init(|| Self::build(3, &[(-1, rational(-1, 6)), (0, rational(4, 3)), (1, rational(-1, 6))]))
    }

    pub fn quintic() -> &'static ReproducingKernel {
        static K: OnceLock<ReproducingKernel> = OnceLock::new();
        K.get_or_init(|| {
            Self::build(
                5,
                &[
                    (-2, rational(13, 240)),
                    (-1, rational(-7, 15)),
                    (0, rational(73, 40)),
                    (1, rational(-7, 15)),
                    (2, rational(13, 240)),
                ],
            )
        })
    }

    pub fn of_degree(degree: usize) -> Result<&'static ReproducingKernel> {
        match degree {
            3 => Ok(Self::cubic()),
            5 => Ok(Self::quintic()),
            _ => Err(Error::InvalidParameter(format!("kernel degree {degree} not in {{3, 5}}"))),
        }
    }

    fn build(degree: usize, stencil: &[(i64, num::BigRational)]) -> Self {
        let zeta = ExactPiecewise::bspline(degree).shifted_sum(stencil);
        let conv = ExactPiecewise::bspline(2 * degree + 1).shifted_sum(&self_convolve(stencil));
        ReproducingKernel {
            degree,
            antiderivative: zeta.antiderivative().to_float(),
            zeta: zeta.to_float(),
            convolution: conv.to_float(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Highest polynomial degree reproduced by the nodal series.
    pub fn reproduction_degree(&self) -> usize {
        self.degree
    }

    pub fn support_radius(&self) -> f64 {
        self.zeta.right()
    }

    pub fn zeta(&self) -> &PiecewisePoly {
        &self.zeta
    }

    pub fn convolution(&self) -> &PiecewisePoly {
        &self.convolution
    }

    pub fn eval(&self, x: f64, j: usize) -> Result<f64> {
        if j > self.degree {
            return Err(Error::UnsupportedOrder(j));
        }
        Ok(self.zeta.eval(x, j))
    }

    /// `∫_{−∞}^{s} ζ`.
    pub fn integral(&self, s: f64) -> f64 {
        self.antiderivative.eval(s, 0)
    }

    /// `χ_{ξ,ρ}(x) = ∫₀¹ ζ(ξ + tρ − x) dt`, exact.
    pub fn localization_weight(&self, xi: f64, rho: i64, x: f64) -> Result<f64> {
        if rho == 0 {
            return Err(Error::Domain { what: "bond ρ in localization weight".into(), arg: 0.0 });
        }
        let r = self.support_radius();
        let a = xi - x;
        let b = xi + rho as f64 - x;
        if a.max(b) <= -r || a.min(b) >= r {
            return Ok(0.0);
        }
        Ok((self.integral(b) - self.integral(a)) / rho as f64)
    }

    /// Sites `ξ` for which `χ_{ξ,ρ}(x)` can be nonzero.
    pub fn weight_sites(&self, rho: i64, x: f64) -> std::ops::RangeInclusive<i64> {
        let r = self.support_radius();
        let lo = (x - r - rho.max(0) as f64).floor() as i64;
        let hi = (x + r - rho.min(0) as f64).ceil() as i64;
        lo..=hi
    }
}

/// `Σ_ξ χ_{ξ,ρ}(x)(ξ − x)^k`, flagged when `k` exceeds the reproduction degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSum {
    pub value: f64,
    pub guaranteed: bool,
}

pub fn moment_sum(kernel: &ReproducingKernel, rho: i64, x: f64, k: u32) -> Result<MomentSum> {
    let mut value = 0.0;
    for xi in kernel.weight_sites(rho, x) {
        let xi = xi as f64;
        value += kernel.localization_weight(xi, rho, x)? * (xi - x).powi(k as i32);
    }
    Ok(MomentSum { value, guaranteed: k as usize <= kernel.reproduction_degree() })
}

/// `u(x) = Σ_j c_j P((x − x_j)/h)` with `x_j = −N + j h`, summed periodically.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSeries {
    n: usize,
    h: f64,
    coeffs: Vec<f64>,
    basis: &'static PiecewisePoly,
}

impl PeriodicSeries {
    pub fn new(n: usize, h: f64, coeffs: Vec<f64>, basis: &'static PiecewisePoly) -> Self {
        PeriodicSeries { n, h, coeffs, basis }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }
}

impl SmoothField for PeriodicSeries {
    fn half_period(&self) -> usize {
        self.n
    }

    fn max_order(&self) -> usize {
        self.basis.degree()
    }

    fn derivative(&self, j: usize, x: f64) -> f64 {
        let m = self.coeffs.len() as i64;
        let s = (wrap(x, self.n) + self.n as f64) / self.h;
        let r = self.basis.right();
        let lo = (s - r).floor() as i64 + 1;
        let hi = (s + r).ceil() as i64 - 1;
        let mut acc = 0.0;
        for j0 in lo..=hi {
            acc += self.coeffs[j0.rem_euclid(m) as usize] * self.basis.eval(s - j0 as f64, j);
        }
        acc * self.h.powi(-(j as i32))
    }
}

/// `v̂(x) = Σ_ξ v(ξ) ζ(x − ξ)`.
pub fn nodal_interpolant(v: &PeriodicLatticeField, kernel: &'static ReproducingKernel) -> PeriodicSeries {
    PeriodicSeries::new(v.half_period(), 1.0, v.values().to_vec(), &kernel.zeta)
}

/// `ṽ(x) = Σ_ξ v(ξ) (ζ*ζ)(x − ξ)`.
pub fn convolution_interpolant(v: &PeriodicLatticeField, kernel: &'static ReproducingKernel) -> PeriodicSeries {
    PeriodicSeries::new(v.half_period(), 1.0, v.values().to_vec(), &kernel.convolution)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterpKind {
    Pi,
    #[serde(alias = "cubic")]
    CubicSpline,
    #[serde(alias = "quartic")]
    QuarticSpline,
}

impl std::str::FromStr for InterpKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pi" => Ok(InterpKind::Pi),
            "cubic" | "cubicspline" => Ok(InterpKind::CubicSpline),
            "quartic" | "quarticspline" => Ok(InterpKind::QuarticSpline),
            other => Err(Error::Config(format!("unknown interpolant '{other}'"))),
        }
    }
}

/// Interpolant used to compare lattice solutions with continuum fields.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasuredField {
    Pi(PiInterpolant),
    Spline(PeriodicSeries),
}

impl SmoothField for MeasuredField {
    fn half_period(&self) -> usize {
        match self {
            MeasuredField::Pi(p) => p.half_period(),
            MeasuredField::Spline(s) => s.half_period(),
        }
    }
    fn max_order(&self) -> usize {
        match self {
            MeasuredField::Pi(p) => p.max_order(),
            MeasuredField::Spline(s) => s.max_order(),
        }
    }
    fn derivative(&self, j: usize, x: f64) -> f64 {
        match self {
            MeasuredField::Pi(p) => p.derivative(j, x),
            MeasuredField::Spline(s) => s.derivative(j, x),
        }
    }
}

/// Periodic spline of the given degree interpolating `v` at the sites, with
/// one basis function centered at every site.
pub fn spline_interpolant(v: &PeriodicLatticeField, degree: usize) -> Result<PeriodicSeries> {
    let b = SplineBasis::get(degree)?;
    let n = v.len();
    let half = (b.support_radius().ceil() as usize).saturating_sub(1);
    let mut a = SkylineMatrix::periodic_band(n, half.min(n.saturating_sub(1)));
    for i in 0..n {
        a.add(i, i, b.poly.eval(0.0, 0));
        for d in 1..=half {
            a.add(i, (i + d) % n, b.poly.eval(d as f64, 0));
        }
    }
    let coeffs = a.cholesky()?.solve(v.values());
    Ok(PeriodicSeries::new(v.half_period(), 1.0, coeffs, &b.poly))
}

pub fn measurement_interpolant(v: &PeriodicLatticeField, kind: InterpKind) -> Result<MeasuredField> {
    match kind {
        InterpKind::Pi => Ok(MeasuredField::Pi(pi_interpolant(v)?)),
        InterpKind::CubicSpline => Ok(MeasuredField::Spline(spline_interpolant(v, 3)?)),
        InterpKind::QuarticSpline => Ok(MeasuredField::Spline(spline_interpolant(v, 4)?)),
    }
}
