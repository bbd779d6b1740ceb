//! Fourier symbols of the linearized models at the reference state, stability
//! constants and negative-mode searches.

use crate::continuum::{ContinuumModel, NGRAD};
use crate::error::Result;
use crate::fem::{ContinuumProblem, PeriodicSplineSpace};
use crate::field::ZeroField;
use crate::optimize::MinimizeProblem;
use crate::potentials::ShiftedPotential;
use serde::Serialize;

fn curvatures(pots: &[ShiftedPotential]) -> Result<Vec<(f64, f64)>> {
    pots.iter().map(|p| Ok((p.rho() as f64, p.eval_derivative(2, 0.0)?))).collect()
}

/// `Σ_ρ ρ² φ″_ρ(0)`.
pub fn cb_symbol(pots: &[ShiftedPotential]) -> Result<f64> {
    Ok(curvatures(pots)?.iter().map(|(r, c)| r * r * c).sum())
}

/// `Σ_ρ φ″_ρ(0) · 4 sin²(kρ/2) / k²`, continuous at `k = 0`.
pub fn atomistic_symbol(pots: &[ShiftedPotential], k: f64) -> Result<f64> {
    if k == 0.0 {
        return cb_symbol(pots);
    }
    Ok(curvatures(pots)?.iter().map(|(r, c)| c * 4.0 * (0.5 * k * r).sin().powi(2) / (k * k)).sum())
}

/// Symbol with `sin²z` replaced by `z² − z⁴/3 + 2z⁶/45`, `z = kρ/2`.
pub fn hoc_taylor_symbol(pots: &[ShiftedPotential], k: f64) -> Result<f64> {
    if k == 0.0 {
        return cb_symbol(pots);
    }
    let [c0, c1, c2] = TAYLOR_SIN2;
    Ok(curvatures(pots)?
        .iter()
        .map(|(r, c)| {
            let z = 0.5 * k * r;
            c * (c0 * z * z + c1 * z.powi(4) + c2 * z.powi(6)) / (0.25 * k * k)
        })
        .sum())
}

/// Coefficients of `z², z⁴, z⁶` in the truncated expansion of `sin²z`.
pub const TAYLOR_SIN2: [f64; 3] = [1.0, -1.0 / 3.0, 2.0 / 45.0];

/// Second variation of the density at the reference state along `e^{ikx}`:
/// `½ Σ_{m,n} W_{mn} k^{m+n} cos((m−n)π/2)`.
pub fn continuum_quadratic_form(model: &ContinuumModel, k: f64) -> Result<f64> {
    let d = model.density_derivatives(&[0.0; NGRAD])?;
    let mut q = 0.0;
    for m in 0..NGRAD {
        for n in 0..NGRAD {
            let phase = match (m as i64 - n as i64).rem_euclid(4) {
                0 => 1.0,
                2 => -1.0,
                _ => 0.0,
            };
            q += d.hess[m][n] * k.powi((m + n + 2) as i32) * phase;
        }
    }
    Ok(0.5 * q)
}

/// [`continuum_quadratic_form`] divided by `½k²`.
pub fn continuum_symbol(model: &ContinuumModel, k: f64) -> Result<f64> {
    if k == 0.0 {
        return Ok(model.density_derivatives(&[0.0; NGRAD])?.hess[0][0]);
    }
    Ok(continuum_quadratic_form(model, k)? / (0.5 * k * k))
}

/// Eigenvalues `λ_m = Σ_ρ 4φ″_ρ(0) sin²(π m ρ / 2N)` of the atomistic Hessian
/// at the reference state, `m = 0..2N`.
pub fn atomistic_hessian_eigenvalues(pots: &[ShiftedPotential], n: usize) -> Result<Vec<f64>> {
    let c = curvatures(pots)?;
    Ok((0..2 * n)
        .map(|m| {
            let theta = std::f64::consts::PI * m as f64 / n as f64;
            c.iter().map(|(r, cr)| 4.0 * cr * (0.5 * theta * r).sin().powi(2)).sum()
        })
        .collect())
}

/// Eigenvalues of a real symmetric circulant matrix from its first row.
pub fn circulant_eigenvalues(first_row: &[f64]) -> Vec<f64> {
    let len = first_row.len();
    (0..len)
        .map(|m| {
            first_row
                .iter()
                .enumerate()
                .map(|(j, a)| a * (2.0 * std::f64::consts::PI * (m * j % len) as f64 / len as f64).cos())
                .sum()
        })
        .collect()
}

/// Smallest atomistic symbol over the resolved modes `k = πm/N`, `m = 1..=N`.
pub fn atomistic_stability_constant(pots: &[ShiftedPotential], n: usize) -> Result<(f64, f64)> {
    let mut best = (f64::INFINITY, 0.0);
    for m in 1..=n {
        let k = std::f64::consts::PI * m as f64 / n as f64;
        let v = atomistic_symbol(pots, k)?;
        if v < best.0 {
            best = (v, k);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolMinimum {
    pub value: f64,
    pub wavenumber: f64,
}

/// Relative roundoff allowance in the symbol ordering test.
pub const ORDERING_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub band: (f64, f64),
    pub points: usize,
    pub lambda_a: SymbolMinimum,
    pub lambda_cb: SymbolMinimum,
    pub lambda_hoc_taylor: SymbolMinimum,
    pub lambda_hoc_direct: SymbolMinimum,
    /// Grid points violating (beyond [`ORDERING_RTOL`]) `φ_a ≤ φ_hoc_taylor ≤ φ_cb`.
    pub ordering_violations: usize,
    /// Largest violation of either inequality.
    pub max_violation: f64,
    pub ordering_holds: bool,
}

/// Row `(k, φ_a, φ_cb, φ_hoc_taylor, φ_hoc_direct)`.
pub fn symbol_row(pots: &[ShiftedPotential], hoc: &ContinuumModel, k: f64) -> Result<[f64; 5]> {
    Ok([k, atomistic_symbol(pots, k)?, cb_symbol(pots)?, hoc_taylor_symbol(pots, k)?, continuum_symbol(hoc, k)?])
}

/// Grid points `k_i = k_max · i / points`, `i = 1..=points`.
pub fn band_grid(k_max: f64, points: usize) -> impl Iterator<Item = f64> {
    (1..=points).map(move |i| k_max * i as f64 / points as f64)
}

/// Minima of the symbols over `(0, k_max]` and the pointwise ordering verdict.
pub fn stability_constants(
    pots: &[ShiftedPotential],
    hoc: &ContinuumModel,
    k_max: f64,
    points: usize,
) -> Result<StabilityReport> {
    let start = SymbolMinimum { value: f64::INFINITY, wavenumber: 0.0 };
    let (mut la, mut lc, mut lt, mut ld) = (start.clone(), start.clone(), start.clone(), start);
    let mut violations = 0;
    let mut max_violation: f64 = 0.0;
    let upd = |m: &mut SymbolMinimum, v: f64, k: f64| {
        if v < m.value {
            *m = SymbolMinimum { value: v, wavenumber: k };
        }
    };
    for k in band_grid(k_max, points) {
        let [_, a, c, t, d] = symbol_row(pots, hoc, k)?;
        upd(&mut la, a, k);
        upd(&mut lc, c, k);
        upd(&mut lt, t, k);
        upd(&mut ld, d, k);
        let excess = (a - t).max(t - c);
        if excess > ORDERING_RTOL * (a.abs() + c.abs()) {
            violations += 1;
            max_violation = max_violation.max(excess);
        }
    }
    Ok(StabilityReport {
        band: (0.0, k_max),
        points,
        lambda_a: la,
        lambda_cb: lc,
        lambda_hoc_taylor: lt,
        lambda_hoc_direct: ld,
        ordering_violations: violations,
        max_violation,
        ordering_holds: violations == 0,
    })
}

/// Smallest `m ≥ 1` with negative quadratic form along `sin(πmx/N)`, searched
/// up to the mesh Nyquist mode `m = N · refine`.
pub fn find_negative_mode(model: &ContinuumModel, n: usize, refine: usize) -> Result<Option<usize>> {
    for m in 1..=n * refine {
        let k = std::f64::consts::PI * m as f64 / n as f64;
        if continuum_quadratic_form(model, k)? < 0.0 {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

/// Rayleigh quotient `vᵀHv / vᵀv` of the assembled Hessian at `u = 0` along
/// the spline interpolant of `sin(πmx/N)`.
pub fn fem_mode_rayleigh(model: &ContinuumModel, space: &PeriodicSplineSpace, m: usize) -> Result<f64> {
    let n = space.half_period();
    let k = std::f64::consts::PI * m as f64 / n as f64;
    let v = space.interpolate(|x| (k * x).sin())?;
    let zero = ZeroField { n };
    let p = ContinuumProblem::new(model, space, &zero);
    let h = p.hessian(&vec![0.0; space.dim()])?.expect("assembled Hessian");
    let c = v.coeffs();
    let hv = h.mul_vec(c);
    let num: f64 = hv.iter().zip(c).map(|(a, b)| a * b).sum();
    let den: f64 = c.iter().map(|a| a * a).sum();
    Ok(num / den)
}

/// Smallest mode with negative assembled-Hessian Rayleigh quotient.
pub fn find_negative_mode_fem(model: &ContinuumModel, space: &PeriodicSplineSpace) -> Result<Option<usize>> {
    for m in 1..space.half_period() * space.refine() {
        if fem_mode_rayleigh(model, space, m)? < 0.0 {
            return Ok(Some(m));
        }
    }
    Ok(None)
}
