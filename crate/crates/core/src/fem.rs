//! Periodic quintic B-spline finite elements for the continuum models.

use crate::atomistic::AtomisticSystem;
use crate::continuum::{ContinuumModel, NGRAD};
use crate::error::{Error, Result};
use crate::field::SmoothField;
use crate::linalg::SkylineMatrix;
use crate::optimize::{minimize, Method, MinimizeProblem, Tolerances};
use crate::splines::{PeriodicSeries, SplineBasis};
use rayon::prelude::*;

/// 5-point Gauss-Legendre rule mapped to `[0, 1]` (weights sum to 1).
pub fn gauss_legendre_unit() -> ([f64; 5], [f64; 5]) {
    let a = (10.0f64 / 7.0).sqrt();
    let x1 = (5.0 - 2.0 * a).sqrt() / 3.0;
    let x2 = (5.0 + 2.0 * a).sqrt() / 3.0;
    let s70 = 70.0f64.sqrt();
    let w0 = 128.0 / 225.0;
    let w1 = (322.0 + 13.0 * s70) / 900.0;
    let w2 = (322.0 - 13.0 * s70) / 900.0;
    let xs = [-x2, -x1, 0.0, x1, x2];
    let ws = [w2, w1, w0, w1, w2];
    (xs.map(|x| 0.5 * (x + 1.0)), ws.map(|w| 0.5 * w))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    pub nodes: [f64; 5],
    pub weights: [f64; 5],
}

impl QuadratureRule {
    pub fn gauss_legendre5() -> Self {
        let (nodes, weights) = gauss_legendre_unit();
        QuadratureRule { nodes, weights }
    }

    /// `∫_a^b f` by the rule on a single interval.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let h = b - a;
        self.nodes.iter().zip(&self.weights).map(|(t, w)| w * h * f(a + h * t)).sum()
    }
}

const NACTIVE: usize = 6;
const NORDER: usize = 6;

/// Quintic B-splines `B₅((x − x_j)/h)` on `[−N, N)`, `x_j = −N + j h`, `h = 1/refine`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSplineSpace {
    n: usize,
    refine: usize,
    rule: QuadratureRule,
    /// `table[m][a][q]`: `m`-th derivative of active function `a` at node `q`.
    table: [[[f64; 5]; NACTIVE]; NORDER],
}

impl PeriodicSplineSpace {
    pub fn new(n: usize, refine: usize) -> Result<Self> {
        if refine == 0 || 2 * n * refine < 2 * NACTIVE {
            return Err(Error::Size(format!("spline space needs at least {} elements", 2 * NACTIVE)));
        }
        let b = SplineBasis::get(5)?;
        let rule = QuadratureRule::gauss_legendre5();
        let h = 1.0 / refine as f64;
        let mut table = [[[0.0; 5]; NACTIVE]; NORDER];
        for (m, tm) in table.iter_mut().enumerate() {
            for (a, ta) in tm.iter_mut().enumerate() {
                for (q, t) in rule.nodes.iter().enumerate() {
                    ta[q] = b.poly().eval(2.0 - a as f64 + t, m) * h.powi(-(m as i32));
                }
            }
        }
        Ok(PeriodicSplineSpace { n, refine, rule, table })
    }

    pub fn half_period(&self) -> usize {
        self.n
    }

    pub fn refine(&self) -> usize {
        self.refine
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.refine as f64
    }

    pub fn dim(&self) -> usize {
        2 * self.n * self.refine
    }

    pub fn num_elements(&self) -> usize {
        self.dim()
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    fn element_left(&self, e: usize) -> f64 {
        -(self.n as f64) + e as f64 * self.spacing()
    }

    fn active(&self, e: usize, a: usize) -> usize {
        (e + self.dim() + a - 2) % self.dim()
    }

    pub fn field(&self, coeffs: Vec<f64>) -> Result<FemField> {
        if coeffs.len() != self.dim() {
            return Err(Error::Size(format!("expected {} coefficients, got {}", self.dim(), coeffs.len())));
        }
        let b = SplineBasis::get(5)?;
        Ok(FemField { series: PeriodicSeries::new(self.n, self.spacing(), coeffs, b.poly()) })
    }

    /// Spline interpolating `f` at the mesh nodes.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> Result<FemField> {
        let b = SplineBasis::get(5)?;
        let m = self.dim();
        let mut a = SkylineMatrix::periodic_band(m, 2);
        for i in 0..m {
            a.add(i, i, b.poly().eval(0.0, 0));
            for d in 1..=2 {
                a.add(i, (i + d) % m, b.poly().eval(d as f64, 0));
            }
        }
        let rhs: Vec<f64> = (0..m).map(|j| f(-(self.n as f64) + j as f64 * self.spacing())).collect();
        self.field(a.cholesky()?.solve(&rhs))
    }

    /// Derivatives `∇^m u`, `m = 0..6`, at quadrature node `q` of element `e`.
    fn jets(&self, coeffs: &[f64], e: usize, q: usize) -> [f64; NORDER] {
        let mut g = [0.0; NORDER];
        for (m, gm) in g.iter_mut().enumerate() {
            for a in 0..NACTIVE {
                *gm += coeffs[self.active(e, a)] * self.table[m][a][q];
            }
        }
        g
    }

    /// `∫ f φ_j dx` for every basis function.
    pub fn load_vector(&self, f: &dyn SmoothField) -> Vec<f64> {
        let h = self.spacing();
        let mut b = vec![0.0; self.dim()];
        for e in 0..self.num_elements() {
            let x0 = self.element_left(e);
            for q in 0..5 {
                let fx = f.value(x0 + h * self.rule.nodes[q]) * self.rule.weights[q] * h;
                for a in 0..NACTIVE {
                    b[self.active(e, a)] += fx * self.table[0][a][q];
                }
            }
        }
        b
    }

    /// Composite quadrature of `∫ F(∇u(x), …) dx` over elements, reduced in element order.
    fn element_sum<T: Send>(&self, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        (0..self.num_elements()).into_par_iter().map(f).collect()
    }
}

/// A field of a [`PeriodicSplineSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct FemField {
    series: PeriodicSeries,
}

impl FemField {
    pub fn coeffs(&self) -> &[f64] {
        self.series.coeffs()
    }
}

impl SmoothField for FemField {
    fn half_period(&self) -> usize {
        self.series.half_period()
    }

    /// Orders above 4 are piecewise: `∇⁵u` is constant per element, `∇⁶u = 0`.
    fn max_order(&self) -> usize {
        5
    }

    fn derivative(&self, j: usize, x: f64) -> f64 {
        self.series.derivative(j, x)
    }
}

/// Energy `∫ W(∇u, …) − ∫ f u` of a continuum model on a spline space.
pub struct ContinuumProblem<'a> {
    model: &'a ContinuumModel,
    space: &'a PeriodicSplineSpace,
    load: Vec<f64>,
}

impl<'a> ContinuumProblem<'a> {
    pub fn new(model: &'a ContinuumModel, space: &'a PeriodicSplineSpace, force: &dyn SmoothField) -> Self {
        let mut load = space.load_vector(force);
        let mean = load.iter().sum::<f64>() / load.len() as f64;
        load.iter_mut().for_each(|b| *b -= mean);
        ContinuumProblem { model, space, load }
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    fn grads(&self, c: &[f64], e: usize, q: usize) -> [f64; NGRAD] {
        let g = self.space.jets(c, e, q);
        [g[1], g[2], g[3], g[4], g[5]]
    }

    fn wrap_err(e: usize, err: Error) -> Error {
        match err {
            Error::Domain { what, arg } => Error::Domain { what: format!("{what} in element {e}"), arg },
            other => other,
        }
    }

    /// `∫ W` without the external work.
    pub fn internal_energy(&self, c: &[f64]) -> Result<f64> {
        self.integrate_density(c, 0.0)
    }

    /// `∫ (W − W(0)) − ⟨f, u⟩`, the energy relative to the reference state.
    pub fn excess_energy(&self, c: &[f64]) -> Result<f64> {
        self.check(c)?;
        let w0 = self.model.density(&[0.0; NGRAD])?;
        Ok(self.integrate_density(c, w0)? - c.iter().zip(&self.load).map(|(a, b)| a * b).sum::<f64>())
    }

    fn integrate_density(&self, c: &[f64], w0: f64) -> Result<f64> {
        let h = self.space.spacing();
        let parts = self.space.element_sum(|e| {
            let mut s = 0.0;
            for q in 0..5 {
                let w = self.model.density(&self.grads(c, e, q)).map_err(|err| Self::wrap_err(e, err))?;
                s += self.space.rule.weights[q] * h * (w - w0);
            }
            Ok(s)
        })?;
        Ok(parts.iter().sum())
    }

    fn check(&self, c: &[f64]) -> Result<()> {
        if c.len() != self.space.dim() {
            return Err(Error::Size(format!("expected {} coefficients, got {}", self.space.dim(), c.len())));
        }
        Ok(())
    }
}

impl MinimizeProblem for ContinuumProblem<'_> {
    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn objective(&self, c: &[f64]) -> Result<f64> {
        self.check(c)?;
        Ok(self.internal_energy(c)? - c.iter().zip(&self.load).map(|(a, b)| a * b).sum::<f64>())
    }

    fn gradient(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.check(c)?;
        let sp = self.space;
        let h = sp.spacing();
        let order = self.model.variant().density_order();
        let parts = sp.element_sum(|e| {
            let mut local = [0.0; NACTIVE];
            for q in 0..5 {
                let d = self.model.density_derivatives(&self.grads(c, e, q)).map_err(|err| Self::wrap_err(e, err))?;
                let wq = sp.rule.weights[q] * h;
                for (a, l) in local.iter_mut().enumerate() {
                    for k in 0..order {
                        *l += wq * d.grad[k] * sp.table[k + 1][a][q];
                    }
                }
            }
            Ok(local)
        })?;
        let mut g: Vec<f64> = self.load.iter().map(|b| -b).collect();
        for (e, local) in parts.iter().enumerate() {
            for (a, l) in local.iter().enumerate() {
                g[sp.active(e, a)] += l;
            }
        }
        Ok(g)
    }

    fn hessian(&self, c: &[f64]) -> Result<Option<SkylineMatrix>> {
        self.check(c)?;
        let sp = self.space;
        let h = sp.spacing();
        let order = self.model.variant().density_order();
        let parts = sp.element_sum(|e| {
            let mut local = [[0.0; NACTIVE]; NACTIVE];
            for q in 0..5 {
                let d = self.model.density_derivatives(&self.grads(c, e, q)).map_err(|err| Self::wrap_err(e, err))?;
                let wq = sp.rule.weights[q] * h;
                let mut t = [[0.0; NACTIVE]; NGRAD];
                for k in 0..order {
                    for a in 0..NACTIVE {
                        t[k][a] = sp.table[k + 1][a][q];
                    }
                }
                for k in 0..order {
                    for l in 0..order {
                        let hk = wq * d.hess[k][l];
                        if hk == 0.0 {
                            continue;
                        }
                        for a in 0..NACTIVE {
                            for b in 0..=a {
                                local[a][b] += hk * t[k][a] * t[l][b];
                            }
                        }
                    }
                }
            }
            Ok(local)
        })?;
        let mut hm = SkylineMatrix::periodic_band(sp.dim(), NACTIVE - 1);
        for (e, local) in parts.iter().enumerate() {
            for a in 0..NACTIVE {
                for b in 0..=a {
                    hm.add(sp.active(e, a), sp.active(e, b), local[a][b]);
                }
            }
        }
        Ok(Some(hm))
    }

    fn mean_zero(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumSolution {
    pub field: FemField,
    pub energy: f64,
    /// Energy relative to the reference state.
    pub excess_energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `E(u) − ⟨f, u⟩` over mean-zero fields of `space`.
pub fn solve_continuum(
    model: &ContinuumModel,
    space: &PeriodicSplineSpace,
    force: &dyn SmoothField,
    method: Method,
    tol: Tolerances,
) -> Result<ContinuumSolution> {
    let p = ContinuumProblem::new(model, space, force);
    let r = minimize(&p, &vec![0.0; space.dim()], method, tol)?;
    Ok(ContinuumSolution {
        excess_energy: p.excess_energy(&r.x)?,
        field: space.field(r.x)?,
        energy: r.value,
        grad_norm: r.grad_norm,
        iterations: r.iterations,
        converged: r.converged,
    })
}

/// `‖∇a − ∇b‖_{L²}` by Gauss-Legendre on cells of width `h/2`.
pub fn grad_l2_distance(a: &dyn SmoothField, b: &dyn SmoothField, space: &PeriodicSplineSpace) -> f64 {
    let cell = 0.5 * space.spacing();
    let cells = 2 * space.num_elements();
    let rule = space.rule;
    let parts: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|c| {
            let x0 = -(space.half_period() as f64) + c as f64 * cell;
            rule.integrate(x0, x0 + cell, |x| (a.derivative(1, x) - b.derivative(1, x)).powi(2))
        })
        .collect();
    parts.iter().sum::<f64>().sqrt()
}

/// `|E_a(u_a) − ⟨f, u_a⟩ − (E(u_c) − ⟨f, u_c⟩)|`.
///
/// The reference energies of both models coincide and are cancelled exactly.
pub fn energy_gap(sys: &AtomisticSystem, u_a: &[f64], u_c: &ContinuumSolution) -> Result<f64> {
    Ok((sys.excess_energy(u_a)? - u_c.excess_energy).abs())
}

/// Total continuum energy of an arbitrary field of `space`.
pub fn continuum_energy(
    model: &ContinuumModel,
    space: &PeriodicSplineSpace,
    force: &dyn SmoothField,
    u: &FemField,
) -> Result<f64> {
    ContinuumProblem::new(model, space, force).objective(u.coeffs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::Variant;
    use crate::field::FourierField;
    use crate::optimize::gradient_check;
    use crate::potentials::{InteractionRange, PairPotential};

    #[test]
    fn quadrature_degree_nine() {
        let r = QuadratureRule::gauss_legendre5();
        for k in 0..=9 {
            let exact = (2.0f64.powi(k + 1) - 1.0) / (k + 1) as f64;
            let got = r.integrate(1.0, 2.0, |x| x.powi(k));
            assert!((got - exact).abs() < 1e-13 * exact, "degree {k}");
        }
    }

    #[test]
    fn quintic_reproduction() {
        let sp = PeriodicSplineSpace::new(16, 1).unwrap();
        let p = |x: f64| 0.3 + x - 0.2 * x * x + 0.05 * x.powi(3) - 0.01 * x.powi(4) + 0.002 * x.powi(5);
        let coeffs = {
            // B-spline coefficients of a quintic: c_j = p − p''/4 + p''''/30 at x_j
            let d2 = |x: f64| -0.4 + 0.3 * x - 0.12 * x * x + 0.04 * x.powi(3);
            let d4 = |x: f64| -0.24 + 0.24 * x;
            (0..32).map(|j| {
                let x = -16.0 + j as f64;
                p(x) - d2(x) / 4.0 + d4(x) / 30.0
            })
            .collect()
        };
        let u = sp.field(coeffs).unwrap();
        for x in [-2.3, 0.0, 0.71, 3.5] {
            assert!((u.value(x) - p(x)).abs() < 1e-10 * p(x).abs().max(1.0));
        }
    }

    #[test]
    fn interpolation_recovers_sine_gradient_norm() {
        let sp = PeriodicSplineSpace::new(16, 1).unwrap();
        let k = std::f64::consts::PI / 16.0;
        let u = sp.interpolate(|x| (k * x).sin()).unwrap();
        let zero = crate::field::ZeroField { n: 16 };
        let d = grad_l2_distance(&u, &zero, &sp);
        assert!((d - k * 16.0f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn gradient_and_hessian_checks() {
        let lj = PairPotential::lennard_jones(1.0).unwrap();
        let sp = PeriodicSplineSpace::new(8, 1).unwrap();
        let f = FourierField::cosine(8, 1.0 / 8.0, 1);
        let x: Vec<f64> = (0..16).map(|i| 0.01 * (0.9 * i as f64).sin()).collect();
        for v in Variant::ALL {
            let m = ContinuumModel::new(v, &lj, 1.0, InteractionRange::new(2).unwrap()).unwrap();
            let p = ContinuumProblem::new(&m, &sp, &f);
            let err = gradient_check(&p, &x, 1e-6).unwrap();
            assert!(err < 1e-6, "{v}: {err}");
        }
    }

    #[test]
    fn zero_force_zero_solution() {
        let p = PairPotential::harmonic(1.0).unwrap();
        let m = ContinuumModel::new(Variant::Hoc4, &p, 1.0, InteractionRange::new(2).unwrap()).unwrap();
        let sp = PeriodicSplineSpace::new(8, 1).unwrap();
        let sol = solve_continuum(&m, &sp, &crate::field::ZeroField { n: 8 }, Method::Newton, Tolerances::default())
            .unwrap();
        assert!(sol.field.coeffs().iter().all(|c| c.abs() < 1e-14));
        assert!((sol.energy - 16.0 * 0.5).abs() < 1e-12);
    }
}
