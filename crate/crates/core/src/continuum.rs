//! Continuum energy densities, variational stresses, Euler-Lagrange residuals
//! and consistency measures for the continuum model variants.

use crate::atomistic::AtomisticSystem;
use crate::error::{Error, Result};
use crate::field::SmoothField;
use crate::lattice::PeriodicLatticeField;
use crate::potentials::{bond_potentials, InteractionRange, PairPotential, ShiftedPotential};
use crate::splines::{convolution_interpolant, nodal_interpolant, ReproducingKernel};
use serde::{Deserialize, Serialize};

/// Number of strain-gradient arguments `g1..g5` a density may depend on.
pub const NGRAD: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "cb")]
    CauchyBorn,
    #[serde(rename = "hoc4")]
    Hoc4,
    #[serde(rename = "hoc6")]
    Hoc6,
    #[serde(rename = "ill2")]
    IllPosed2,
    #[serde(rename = "fir")]
    FirstOrderExp,
}

impl Variant {
    pub const ALL: [Variant; 5] =
        [Variant::CauchyBorn, Variant::Hoc4, Variant::Hoc6, Variant::IllPosed2, Variant::FirstOrderExp];

    pub fn name(self) -> &'static str {
        match self {
            Variant::CauchyBorn => "cb",
            Variant::Hoc4 => "hoc4",
            Variant::Hoc6 => "hoc6",
            Variant::IllPosed2 => "ill2",
            Variant::FirstOrderExp => "fir",
        }
    }

    /// Highest derivative `∇^k u` entering the density.
    pub fn density_order(self) -> usize {
        match self {
            Variant::CauchyBorn => 1,
            Variant::Hoc4 | Variant::FirstOrderExp => 3,
            Variant::Hoc6 => 5,
            Variant::IllPosed2 => 2,
        }
    }

    /// Coefficients `c_k` of `a = Σ c_k ∇^k u` for densities of the form `φ_ρ(a)`.
    fn argument(self, rho: f64) -> Option<[f64; NGRAD]> {
        let r = rho;
        match self {
            Variant::CauchyBorn => Some([r, 0.0, 0.0, 0.0, 0.0]),
            Variant::Hoc4 => Some([r, 0.0, r.powi(3) / 24.0, 0.0, 0.0]),
            Variant::Hoc6 => Some([r, 0.0, r.powi(3) / 24.0, 0.0, r.powi(5) / 1920.0]),
            Variant::FirstOrderExp => Some([r, r * r / 2.0, r.powi(3) / 6.0, 0.0, 0.0]),
            Variant::IllPosed2 => None,
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cb" | "cauchyborn" | "cauchy-born" => Ok(Variant::CauchyBorn),
            "hoc4" | "hoc" => Ok(Variant::Hoc4),
            "hoc6" => Ok(Variant::Hoc6),
            "ill2" | "illposed2" => Ok(Variant::IllPosed2),
            "fir" | "firstorderexp" => Ok(Variant::FirstOrderExp),
            other => Err(Error::Config(format!("unknown continuum model '{other}'"))),
        }
    }
}

/// Value, gradient and Hessian of a density with respect to `(g1, …, g5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityDerivatives {
    pub value: f64,
    pub grad: [f64; NGRAD],
    pub hess: [[f64; NGRAD]; NGRAD],
}

/// Truncated Taylor series in `t` of a function of `x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Jet {
    c: [f64; Jet::LEN],
}

impl Jet {
    const LEN: usize = 8;

    fn zero() -> Self {
        Jet { c: [0.0; Jet::LEN] }
    }

    /// Jet of `∇^k u` at `x` from derivatives `d[j] = ∇^j u(x)`.
    fn of_derivative(d: &[f64], k: usize, order: usize) -> Self {
        let mut j = Jet::zero();
        let mut fact = 1.0;
        for i in 0..=order {
            if i > 0 {
                fact *= i as f64;
            }
            j.c[i] = d.get(k + i).copied().unwrap_or(0.0) / fact;
        }
        j
    }

    fn axpy(&mut self, a: f64, other: &Jet) {
        self.c.iter_mut().zip(&other.c).for_each(|(x, y)| *x += a * y);
    }

    fn mul(&self, other: &Jet, order: usize) -> Jet {
        let mut out = Jet::zero();
        for i in 0..=order {
            for j in 0..=order - i {
                out.c[i + j] += self.c[i] * other.c[j];
            }
        }
        out
    }

    /// `f(self)` given `derivs[i] = f^(i)(self.c[0])`.
    fn compose(&self, derivs: &[f64], order: usize) -> Jet {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut out = Jet::zero();
        let mut pow = Jet::zero();
        pow.c[0] = 1.0;
        let mut fact = 1.0;
        for (i, d) in derivs.iter().enumerate().take(order + 1) {
            if i > 0 {
                fact *= i as f64;
                pow = pow.mul(&delta, order);
            }
            out.axpy(d / fact, &pow);
        }
        out
    }

    /// `D^m` of the underlying function at `t = 0`.
    fn derivative(&self, m: usize) -> f64 {
        (1..=m).fold(self.c[m], |acc, i| acc * i as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumModel {
    variant: Variant,
    pots: Vec<ShiftedPotential>,
}

impl ContinuumModel {
    pub fn new(variant: Variant, potential: &PairPotential, deformation: f64, range: InteractionRange) -> Result<Self> {
        Ok(ContinuumModel { variant, pots: bond_potentials(potential, deformation, range)? })
    }

    pub fn from_potentials(variant: Variant, pots: Vec<ShiftedPotential>) -> Self {
        ContinuumModel { variant, pots }
    }

    /// The model built on the bonds of an atomistic system.
    pub fn for_system(variant: Variant, sys: &AtomisticSystem) -> Self {
        Self::from_potentials(variant, sys.potentials().to_vec())
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn potentials(&self) -> &[ShiftedPotential] {
        &self.pots
    }

    /// Derivative orders of `u` needed to evaluate the stress.
    pub fn stress_order(&self) -> usize {
        2 * self.variant.density_order() - 1
    }

    pub fn prestress(&self) -> Result<f64> {
        self.pots.iter().map(|p| Ok(p.rho() as f64 * p.eval_derivative(1, 0.0)?)).sum()
    }

    /// Energy density at `g = (∇u, ∇²u, …, ∇⁵u)`.
    pub fn density(&self, g: &[f64; NGRAD]) -> Result<f64> {
        let mut w = 0.0;
        for p in &self.pots {
            let rho = p.rho() as f64;
            match self.variant.argument(rho) {
                Some(c) => w += p.eval_derivative(0, dot(&c, g))?,
                None => {
                    let d = p.eval_upto(2, rho * g[0])?;
                    w += d[0] - rho.powi(4) / 24.0 * d[2] * g[1] * g[1];
                }
            }
        }
        Ok(w)
    }

    pub fn density_derivatives(&self, g: &[f64; NGRAD]) -> Result<DensityDerivatives> {
        let mut out = DensityDerivatives { value: 0.0, grad: [0.0; NGRAD], hess: [[0.0; NGRAD]; NGRAD] };
        for p in &self.pots {
            let rho = p.rho() as f64;
            match self.variant.argument(rho) {
                Some(c) => {
                    let d = p.eval_upto(2, dot(&c, g))?;
                    out.value += d[0];
                    for k in 0..NGRAD {
                        out.grad[k] += c[k] * d[1];
                        for l in 0..NGRAD {
                            out.hess[k][l] += c[k] * c[l] * d[2];
                        }
                    }
                }
                None => {
                    let d = p.eval_upto(4, rho * g[0])?;
                    let g2 = g[1];
                    let (r4, r5, r6) = (rho.powi(4), rho.powi(5), rho.powi(6));
                    out.value += d[0] - r4 / 24.0 * d[2] * g2 * g2;
                    out.grad[0] += rho * d[1] - r5 / 24.0 * d[3] * g2 * g2;
                    out.grad[1] += -r4 / 12.0 * d[2] * g2;
                    out.hess[0][0] += rho * rho * d[2] - r6 / 24.0 * d[4] * g2 * g2;
                    out.hess[0][1] += -r5 / 12.0 * d[3] * g2;
                    out.hess[1][0] += -r5 / 12.0 * d[3] * g2;
                    out.hess[1][1] += -r4 / 12.0 * d[2];
                }
            }
        }
        Ok(out)
    }

    /// `Σ_k (−1)^{k−1} D^{k−1+extra} ∂W/∂g_k` at `x`, without the constant `Σ ρ φ′_ρ(0)`
    /// when `excess` is set.
    fn variational(&self, u: &dyn SmoothField, x: f64, extra: usize, excess: bool) -> Result<f64> {
        let kmax = self.variant.density_order();
        let order = kmax - 1 + extra;
        let mut d = [0.0; 16];
        u.derivatives(x, &mut d[..=kmax + order]);
        let gj: Vec<Jet> = (0..=kmax).map(|k| Jet::of_derivative(&d, k, order)).collect();
        let mut s = 0.0;
        for p in &self.pots {
            let rho = p.rho() as f64;
            let base = if excess && extra == 0 { rho * p.eval_derivative(1, 0.0)? } else { 0.0 };
            match self.variant.argument(rho) {
                Some(c) => {
                    let mut a = Jet::zero();
                    for k in 1..=kmax {
                        a.axpy(c[k - 1], &gj[k]);
                    }
                    let derivs = p.eval_upto(order + 1, a.c[0])?;
                    let dphi = a.compose(&derivs[1..], order);
                    for k in 1..=kmax {
                        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                        let m = k - 1 + extra;
                        let mut term = dphi.derivative(m);
                        if m == 0 {
                            term = rho * term - base;
                            s += sign * term;
                        } else {
                            s += sign * c[k - 1] * term;
                        }
                    }
                }
                None => {
                    let mut a = Jet::zero();
                    a.axpy(rho, &gj[1]);
                    let derivs = p.eval_upto(order + 3, a.c[0])?;
                    let p1 = a.compose(&derivs[1..], order);
                    let p2 = a.compose(&derivs[2..], order);
                    let p3 = a.compose(&derivs[3..], order);
                    let g2 = gj[2];
                    let g2sq = g2.mul(&g2, order);
                    let mut w1 = Jet::zero();
                    w1.axpy(rho, &p1);
                    w1.axpy(-rho.powi(5) / 24.0, &p3.mul(&g2sq, order));
                    let mut w2 = Jet::zero();
                    w2.axpy(-rho.powi(4) / 12.0, &p2.mul(&g2, order));
                    s += w1.derivative(extra) - base - w2.derivative(1 + extra);
                }
            }
        }
        Ok(s)
    }

    /// Stress `S(u; x)` with `∫ S ∇v = ⟨δE(u), v⟩` for all periodic `v`.
    pub fn stress(&self, u: &dyn SmoothField, x: f64) -> Result<f64> {
        self.variational(u, x, 0, false)
    }

    /// [`ContinuumModel::stress`] minus the prestress `Σ ρ φ′_ρ(0)`.
    pub fn stress_excess(&self, u: &dyn SmoothField, x: f64) -> Result<f64> {
        self.variational(u, x, 0, true)
    }

    /// `∇S(u; x)`; the forced equilibrium equation reads `∇S + f = 0`.
    pub fn euler_lagrange(&self, u: &dyn SmoothField, x: f64) -> Result<f64> {
        self.variational(u, x, 1, false)
    }
}

fn dot(a: &[f64; NGRAD], b: &[f64; NGRAD]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn require(m: &ContinuumModel, v: Variant) -> Result<()> {
    if m.variant != v {
        return Err(Error::InvalidParameter(format!("expected a {} model, got {}", v, m.variant)));
    }
    Ok(())
}

/// Closed-form stress of the fourth-order model.
pub fn hoc_stress(m: &ContinuumModel, u: &dyn SmoothField, x: f64) -> Result<f64> {
    require(m, Variant::Hoc4)?;
    let mut g = [0.0; 6];
    u.derivatives(x, &mut g);
    let mut s = 0.0;
    for p in &m.pots {
        let r = p.rho() as f64;
        let a = r * g[1] + r.powi(3) / 24.0 * g[3];
        let b = r * g[2] + r.powi(3) / 24.0 * g[4];
        let d = p.eval_upto(3, a)?;
        s += r * d[1]
            + r.powi(3) / 24.0 * d[3] * b * b
            + r.powi(4) / 24.0 * d[2] * g[3]
            + r.powi(6) / 576.0 * d[2] * g[5];
    }
    Ok(s)
}

/// Closed-form stress of the sixth-order model, expanded about `ρ∇u`.
pub fn hoc6_stress(m: &ContinuumModel, u: &dyn SmoothField, x: f64) -> Result<f64> {
    require(m, Variant::Hoc6)?;
    let mut g = [0.0; 6];
    u.derivatives(x, &mut g);
    let (g2, g3, g4, g5) = (g[2], g[3], g[4], g[5]);
    let mut s = 0.0;
    for p in &m.pots {
        let r = p.rho() as f64;
        let d = p.eval_upto(5, r * g[1])?;
        s += r * d[1]
            + r.powi(4) / 12.0 * d[2] * g3
            + r.powi(5) / 24.0 * d[3] * g2 * g2
            + r.powi(6) / 360.0 * d[2] * g5
            + r.powi(7) / 240.0 * d[3] * g3 * g3
            + r.powi(7) / 180.0 * d[3] * g2 * g4
            + 7.0 * r.powi(8) / 1440.0 * d[4] * g3 * g2 * g2
            + r.powi(9) / 1920.0 * d[5] * g2.powi(4);
    }
    Ok(s)
}

/// Closed-form Euler-Lagrange operator `W = ∇S` of the fourth-order model.
pub fn el_residual(m: &ContinuumModel, u: &dyn SmoothField, x: f64) -> Result<f64> {
    require(m, Variant::Hoc4)?;
    let mut g = [0.0; 7];
    u.derivatives(x, &mut g);
    let mut w = 0.0;
    for p in &m.pots {
        let r = p.rho() as f64;
        let r3 = r.powi(3) / 24.0;
        let a = r * g[1] + r3 * g[3];
        let a1 = r * g[2] + r3 * g[4];
        let a2 = r * g[3] + r3 * g[5];
        let a3 = r * g[4] + r3 * g[6];
        let d = p.eval_upto(4, a)?;
        w += r * d[2] * a1 + r3 * d[4] * a1.powi(3) + 3.0 * r3 * d[3] * a1 * a2 + r3 * d[2] * a3;
    }
    Ok(w)
}

/// `R(u; x) = S^a(u; x) − S(u; x)`, with both prestresses removed analytically.
pub fn consistency_residual(
    sys: &AtomisticSystem,
    m: &ContinuumModel,
    u: &dyn SmoothField,
    samples: &PeriodicLatticeField,
    kernel: &ReproducingKernel,
    x: f64,
) -> Result<f64> {
    Ok(sys.atomistic_stress_excess(samples, kernel, x)? - m.stress_excess(u, x)?)
}

/// `|⟨f, ṽ⟩_lattice − ∫ f v̂ dx|` with `ṽ` sampled at sites and the integral by
/// 5-point Gauss-Legendre on half-cells.
pub fn external_work_gap(f: &dyn SmoothField, v: &PeriodicLatticeField, kernel: &'static ReproducingKernel) -> f64 {
    let n = v.half_period() as i64;
    let vt = convolution_interpolant(v, kernel);
    let vh = nodal_interpolant(v, kernel);
    let discrete: f64 = (-n..n).map(|xi| f.value(xi as f64) * vt.value(xi as f64)).sum();
    let (nodes, weights) = crate::fem::gauss_legendre_unit();
    let mut integral = 0.0;
    for cell in 0..4 * n {
        let left = -(n as f64) + 0.5 * cell as f64;
        for (t, w) in nodes.iter().zip(&weights) {
            let x = left + 0.5 * t;
            integral += 0.5 * w * f.value(x) * vh.value(x);
        }
    }
    (discrete - integral).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FourierField;

    fn model(v: Variant, r_cut: usize, lj: bool) -> ContinuumModel {
        let p = if lj { PairPotential::lennard_jones(1.0) } else { PairPotential::harmonic(1.0) }.unwrap();
        ContinuumModel::new(v, &p, 1.0, InteractionRange::new(r_cut).unwrap()).unwrap()
    }

    #[test]
    fn zero_gradients_give_reference_density() {
        for v in Variant::ALL {
            let m = model(v, 2, false);
            assert_eq!(m.density(&[0.0; NGRAD]).unwrap(), 0.5);
        }
    }

    #[test]
    fn harmonic_nn_densities() {
        let g = [0.3, -0.2, 0.7, 0.0, 0.0];
        let hoc = model(Variant::Hoc4, 1, false).density(&g).unwrap();
        assert!((hoc - 0.5 * (0.3f64 + 0.7 / 24.0).powi(2)).abs() < 1e-15);
        let ill = model(Variant::IllPosed2, 1, false).density(&g).unwrap();
        assert!((ill - (0.5 * 0.09 - 0.04 / 24.0)).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_match_variational() {
        let u = FourierField::new(16, vec![(0.4, 1, 0.2), (0.05, 3, 1.1)]);
        for lj in [false, true] {
            let m = model(Variant::Hoc4, 2, lj);
            for x in [-7.3, 0.0, 2.9] {
                let a = hoc_stress(&m, &u, x).unwrap();
                let b = m.stress(&u, x).unwrap();
                assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{a} {b}");
                let a = el_residual(&m, &u, x).unwrap();
                let b = m.euler_lagrange(&u, x).unwrap();
                assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{a} {b}");
            }
        }
    }

    #[test]
    fn harmonic_el_operator() {
        let u = FourierField::sine(8, 1.0, 3);
        let k = u.wavenumber(3);
        let m = model(Variant::Hoc4, 1, false);
        let x = 0.37;
        let w = m.euler_lagrange(&u, x).unwrap();
        let expect = (-k * k + k.powi(4) / 12.0 - k.powi(6) / 576.0) * (k * x).sin();
        assert!((w - expect).abs() < 1e-13);
    }

    #[test]
    fn excess_stress_subtracts_prestress() {
        let u = FourierField::sine(8, 0.1, 1);
        for v in Variant::ALL {
            let m = model(v, 2, true);
            let full = m.stress(&u, 0.3).unwrap();
            let ex = m.stress_excess(&u, 0.3).unwrap();
            assert!((full - ex - m.prestress().unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn parse_variants() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("illposed2".parse::<Variant>().unwrap(), Variant::IllPosed2);
        assert!("x".parse::<Variant>().is_err());
    }
}
