//! Periodic atomistic chain: energy, derivatives, solver and atomistic stress.

use crate::error::{Error, Result};
use crate::lattice::{check_admissible, AdmissibilityReport, AdmissibleBound, PeriodicLatticeField};
use crate::linalg::SkylineMatrix;
use crate::optimize::{minimize, Method, MinimizeProblem, MinimizeResult, Tolerances};
use crate::potentials::{bond_potentials, InteractionRange, PairPotential, ShiftedPotential};
use crate::splines::ReproducingKernel;

/// Dead-load force `f(ξ) = ε cos(πεξ)` with `ε = 1/N`.
pub fn standard_force(n: usize) -> PeriodicLatticeField {
    let eps = 1.0 / n as f64;
    PeriodicLatticeField::from_fn(n, |xi| eps * (std::f64::consts::PI * eps * xi).cos())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomisticSystem {
    n: usize,
    deformation: f64,
    range: InteractionRange,
    pots: Vec<ShiftedPotential>,
    force: PeriodicLatticeField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomisticSolution {
    pub displacement: PeriodicLatticeField,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub admissibility: AdmissibilityReport,
}

impl AtomisticSystem {
    pub fn new(
        potential: &PairPotential,
        deformation: f64,
        range: InteractionRange,
        force: PeriodicLatticeField,
    ) -> Result<Self> {
        let n = force.half_period();
        if 2 * n <= 2 * range.r_cut() {
            return Err(Error::Size(format!("period 2N = {} too short for r_cut = {}", 2 * n, range.r_cut())));
        }
        if !force.is_mean_zero() {
            return Err(Error::InvalidParameter(format!("force has nonzero mean {:e}", force.mean())));
        }
        let pots = bond_potentials(potential, deformation, range)?;
        Ok(AtomisticSystem { n, deformation, range, pots, force })
    }

    /// System loaded by [`standard_force`].
    pub fn standard(potential: &PairPotential, range: InteractionRange, n: usize) -> Result<Self> {
        Self::new(potential, 1.0, range, standard_force(n).project_mean_zero())
    }

    pub fn half_period(&self) -> usize {
        self.n
    }

    pub fn deformation(&self) -> f64 {
        self.deformation
    }

    pub fn range(&self) -> InteractionRange {
        self.range
    }

    pub fn potentials(&self) -> &[ShiftedPotential] {
        &self.pots
    }

    pub fn force(&self) -> &PeriodicLatticeField {
        &self.force
    }

    fn check_len(&self, u: &[f64]) -> Result<()> {
        if u.len() != 2 * self.n {
            return Err(Error::Size(format!("expected {} values, got {}", 2 * self.n, u.len())));
        }
        Ok(())
    }

    fn diff(&self, u: &[f64], i: usize, rho: i64) -> f64 {
        let len = 2 * self.n;
        u[(i + rho as usize) % len] - u[i]
    }

    /// `Σ_ξ Σ_ρ φ_ρ(D_ρ u(ξ))`.
    pub fn internal_energy(&self, u: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        let mut e = 0.0;
        for i in 0..2 * self.n {
            for p in &self.pots {
                e += p.eval_derivative(0, self.diff(u, i, p.rho()))?;
            }
        }
        Ok(e)
    }

    /// Gradient of the internal energy (no external force).
    pub fn internal_gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let len = 2 * self.n;
        let mut g = vec![0.0; len];
        for i in 0..len {
            for p in &self.pots {
                let j = (i + p.rho() as usize) % len;
                let d = p.eval_derivative(1, u[j] - u[i])?;
                g[j] += d;
                g[i] -= d;
            }
        }
        Ok(g)
    }

    /// `Σ_ξ Σ_ρ (φ_ρ(D_ρ u(ξ)) − φ_ρ(0)) − ⟨f, u⟩`, the energy relative to the reference state.
    pub fn excess_energy(&self, u: &[f64]) -> Result<f64> {
        self.check_len(u)?;
        let mut e = 0.0;
        for p in &self.pots {
            let e0 = p.eval_derivative(0, 0.0)?;
            for i in 0..2 * self.n {
                e += p.eval_derivative(0, self.diff(u, i, p.rho()))? - e0;
            }
        }
        Ok(e - external_work(self.force.values(), u))
    }

    /// `E_a(u) − ⟨f, u⟩`.
    pub fn energy(&self, u: &[f64]) -> Result<f64> {
        Ok(self.internal_energy(u)? - external_work(self.force.values(), u))
    }

    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut g = self.internal_gradient(u)?;
        g.iter_mut().zip(self.force.values()).for_each(|(g, f)| *g -= f);
        Ok(g)
    }

    /// Banded periodic Hessian of the energy.
    pub fn hessian(&self, u: &[f64]) -> Result<SkylineMatrix> {
        self.check_len(u)?;
        let len = 2 * self.n;
        let mut h = SkylineMatrix::periodic_band(len, self.range.r_cut());
        for i in 0..len {
            for p in &self.pots {
                let j = (i + p.rho() as usize) % len;
                let k = p.eval_derivative(2, u[j] - u[i])?;
                h.add(i, i, k);
                h.add(j, j, k);
                h.add(i, j, -k);
            }
        }
        Ok(h)
    }

    pub fn solve(&self, method: Method, tol: Tolerances) -> Result<AtomisticSolution> {
        self.solve_from(&vec![0.0; 2 * self.n], method, tol)
    }

    pub fn solve_from(&self, u0: &[f64], method: Method, tol: Tolerances) -> Result<AtomisticSolution> {
        let r: MinimizeResult = minimize(self, u0, method, tol)?;
        let displacement = PeriodicLatticeField::new(self.n, r.x)?;
        let admissibility =
            check_admissible(&displacement, self.range.r_cut(), AdmissibleBound::from_deformation(self.deformation)?);
        Ok(AtomisticSolution {
            displacement,
            energy: r.value,
            grad_norm: r.grad_norm,
            iterations: r.iterations,
            converged: r.converged,
            admissibility,
        })
    }

    /// Prestress `Σ_ρ ρ φ′_ρ(0)` of the reference configuration.
    pub fn prestress(&self) -> Result<f64> {
        let mut s = 0.0;
        for p in &self.pots {
            s += p.rho() as f64 * p.eval_derivative(1, 0.0)?;
        }
        Ok(s)
    }

    /// `S^a(u; x) = Σ_ξ Σ_ρ ρ φ′_ρ(D_ρ u(ξ)) χ_{ξ,ρ}(x)`.
    pub fn atomistic_stress(&self, u: &PeriodicLatticeField, kernel: &ReproducingKernel, x: f64) -> Result<f64> {
        Ok(self.stress_sum(u, kernel, x, false)? + self.prestress()?)
    }

    /// `S^a(u; x)` minus the prestress, summed without forming the constant.
    pub fn atomistic_stress_excess(&self, u: &PeriodicLatticeField, kernel: &ReproducingKernel, x: f64) -> Result<f64> {
        self.stress_sum(u, kernel, x, true)
    }

    fn stress_sum(&self, u: &PeriodicLatticeField, kernel: &ReproducingKernel, x: f64, excess: bool) -> Result<f64> {
        let mut s = 0.0;
        for p in &self.pots {
            let rho = p.rho();
            let base = p.eval_derivative(1, 0.0)?;
            for xi in kernel.weight_sites(rho, x) {
                let w = kernel.localization_weight(xi as f64, rho, x)?;
                if w == 0.0 {
                    continue;
                }
                let dphi = p.eval_derivative(1, u.finite_difference(rho, xi))? - base;
                s += rho as f64 * dphi * w;
            }
        }
        if !excess {
            // the constant part integrates to one against the weights
            let mut prest = 0.0;
            for p in &self.pots {
                let rho = p.rho();
                let w: f64 = kernel
                    .weight_sites(rho, x)
                    .map(|xi| kernel.localization_weight(xi as f64, rho, x))
                    .sum::<Result<f64>>()?;
                prest += rho as f64 * p.eval_derivative(1, 0.0)? * (w - 1.0);
            }
            s += prest;
        }
        Ok(s)
    }
}

impl MinimizeProblem for AtomisticSystem {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn objective(&self, x: &[f64]) -> Result<f64> {
        self.energy(x)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        AtomisticSystem::gradient(self, x)
    }

    fn hessian(&self, x: &[f64]) -> Result<Option<SkylineMatrix>> {
        AtomisticSystem::hessian(self, x).map(Some)
    }

    fn mean_zero(&self) -> bool {
        true
    }
}

/// `Σ_ξ f(ξ) u(ξ)`.
pub fn external_work(f: &[f64], u: &[f64]) -> f64 {
    f.iter().zip(u).map(|(a, b)| a * b).sum()
}
