//! Newton and BFGS minimizers over (optionally) mean-zero coefficient vectors.

use crate::error::{Error, Result};
use crate::linalg::SkylineMatrix;
use serde::{Deserialize, Serialize};

/// Objective with analytic gradient and optional Hessian.
pub trait MinimizeProblem {
    fn dim(&self) -> usize;
    fn objective(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn hessian(&self, _x: &[f64]) -> Result<Option<SkylineMatrix>> {
        Ok(None)
    }

    /// Whether iterates are constrained to zero mean (the constant mode is null).
    fn mean_zero(&self) -> bool {
        false
    }

    fn project(&self, x: &mut [f64]) {
        if self.mean_zero() && !x.is_empty() {
            let m = x.iter().sum::<f64>() / x.len() as f64;
            x.iter_mut().for_each(|v| *v -= m);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Newton,
    Bfgs,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "newton" => Ok(Method::Newton),
            "bfgs" => Ok(Method::Bfgs),
            other => Err(Error::Config(format!("unknown optimizer '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { grad_tol: 1e-10, max_iter: 500 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub message: Option<String>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}

fn projected_gradient<P: MinimizeProblem + ?Sized>(p: &P, x: &[f64]) -> Result<Vec<f64>> {
    let mut g = p.gradient(x)?;
    p.project(&mut g);
    Ok(g)
}

pub fn minimize<P: MinimizeProblem + ?Sized>(p: &P, x0: &[f64], method: Method, tol: Tolerances) -> Result<MinimizeResult> {
    match method {
        Method::Newton => newton_minimize(p, x0, tol),
        Method::Bfgs => bfgs_minimize(p, x0, tol),
    }
}

/// Newton's method with backtracking. A Hessian that is not positive definite
/// on the admissible subspace is returned as [`Error::NotPositiveDefinite`].
pub fn newton_minimize<P: MinimizeProblem + ?Sized>(p: &P, x0: &[f64], tol: Tolerances) -> Result<MinimizeResult> {
    let mut x = x0.to_vec();
    p.project(&mut x);
    let mut f = p.objective(&x)?;
    let mut g = projected_gradient(p, &x)?;
    for it in 0..tol.max_iter {
        let gn = inf_norm(&g);
        if gn <= tol.grad_tol {
            return Ok(MinimizeResult { x, value: f, grad_norm: gn, iterations: it, converged: true, message: None });
        }
        let mut h = p
            .hessian(&x)?
            .ok_or_else(|| Error::InvalidParameter("Newton's method needs a Hessian".into()))?;
        if p.mean_zero() {
            // pin the null constant mode
            let pin = h.max_abs_diagonal().max(1.0);
            h.add(0, 0, pin);
        }
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut d = h.cholesky()?.solve(&rhs);
        p.project(&mut d);
        let slope = dot(&g, &d);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let xn = axpy(&x, alpha, &d);
            if let Ok(fnew) = p.objective(&xn) {
                let armijo = fnew <= f + 1e-4 * alpha * slope + 1e-13 * f.abs().max(1.0);
                if armijo {
                    let gnew = projected_gradient(p, &xn)?;
                    if fnew < f || inf_norm(&gnew) < gn {
                        x = xn;
                        f = fnew;
                        g = gnew;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            let gn = inf_norm(&g);
            return Ok(MinimizeResult {
                x,
                value: f,
                grad_norm: gn,
                iterations: it,
                converged: gn <= tol.grad_tol,
                message: Some("line search stalled".into()),
            });
        }
    }
    let gn = inf_norm(&g);
    Ok(MinimizeResult {
        x,
        value: f,
        grad_norm: gn,
        iterations: tol.max_iter,
        converged: gn <= tol.grad_tol,
        message: Some("iteration limit reached".into()),
    })
}

struct LinePoint {
    alpha: f64,
    f: f64,
    slope: f64,
    x: Vec<f64>,
    g: Vec<f64>,
}

/// Strong Wolfe line search (bracketing + zoom), `c1 = 1e-4`, `c2 = 0.9`.
fn wolfe_search<P: MinimizeProblem + ?Sized>(p: &P, x: &[f64], f0: f64, g0: &[f64], d: &[f64]) -> Result<LinePoint> {
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    const MAX_TRIALS: usize = 60;
    let s0 = dot(g0, d);
    // tolerance for energy differences lost to roundoff
    let noise = 1e-14 * f0.abs().max(1.0);
    let eval = |alpha: f64| -> Result<LinePoint> {
        let mut xn = axpy(x, alpha, d);
        p.project(&mut xn);
        let f = p.objective(&xn)?;
        let g = projected_gradient(p, &xn)?;
        Ok(LinePoint { alpha, f, slope: dot(&g, d), x: xn, g })
    };
    let sufficient = |pt: &LinePoint| pt.f <= f0 + C1 * pt.alpha * s0 + noise;
    let curvature = |pt: &LinePoint| pt.slope.abs() <= -C2 * s0;

    let mut lo = LinePoint { alpha: 0.0, f: f0, slope: s0, x: x.to_vec(), g: g0.to_vec() };
    let mut alpha = 1.0;
    let mut trials = 0;
    let mut hi: Option<LinePoint> = None;
    while trials < MAX_TRIALS {
        trials += 1;
        let pt = match eval(alpha) {
            Ok(pt) => pt,
            Err(_) => {
                // outside the energy's domain: shrink
                hi = Some(LinePoint { alpha, f: f64::INFINITY, slope: 0.0, x: vec![], g: vec![] });
                break;
            }
        };
        if !sufficient(&pt) || (trials > 1 && pt.f >= lo.f) {
            hi = Some(pt);
            break;
        }
        if curvature(&pt) {
            return Ok(pt);
        }
        if pt.slope >= 0.0 {
            hi = Some(lo);
            lo = pt;
            break;
        }
        lo = pt;
        alpha *= 2.0;
    }
    let mut hi = hi.ok_or(Error::LineSearch(trials))?;
    while trials < MAX_TRIALS {
        trials += 1;
        let a = if hi.f.is_finite() && !hi.x.is_empty() {
            // minimizer of the quadratic through lo (value, slope) and hi (value)
            let da = hi.alpha - lo.alpha;
            let denom = 2.0 * (hi.f - lo.f - lo.slope * da);
            let q = if denom > 0.0 { lo.alpha - lo.slope * da * da / denom } else { f64::NAN };
            let (a0, a1) = (lo.alpha.min(hi.alpha), lo.alpha.max(hi.alpha));
            if q.is_finite() && q > a0 + 0.1 * (a1 - a0) && q < a1 - 0.1 * (a1 - a0) {
                q
            } else {
                0.5 * (lo.alpha + hi.alpha)
            }
        } else {
            0.5 * (lo.alpha + hi.alpha)
        };
        let pt = match eval(a) {
            Ok(pt) => pt,
            Err(_) => {
                hi = LinePoint { alpha: a, f: f64::INFINITY, slope: 0.0, x: vec![], g: vec![] };
                continue;
            }
        };
        if !sufficient(&pt) || pt.f >= lo.f + noise {
            hi = pt;
        } else {
            if curvature(&pt) {
                return Ok(pt);
            }
            if pt.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = pt;
        }
        if (hi.alpha - lo.alpha).abs() < 1e-16 * lo.alpha.abs().max(1.0) {
            break;
        }
    }
    if lo.alpha > 0.0 {
        return Ok(lo);
    }
    Err(Error::LineSearch(trials))
}

/// BFGS with a dense inverse-Hessian approximation and strong Wolfe steps.
pub fn bfgs_minimize<P: MinimizeProblem + ?Sized>(p: &P, x0: &[f64], tol: Tolerances) -> Result<MinimizeResult> {
    let n = p.dim();
    let mut x = x0.to_vec();
    p.project(&mut x);
    let mut f = p.objective(&x)?;
    let mut g = projected_gradient(p, &x)?;
    let mut hinv = vec![0.0; n * n];
    for i in 0..n {
        hinv[i * n + i] = 1.0;
    }
    let mut scaled = false;
    for it in 0..tol.max_iter {
        let gn = inf_norm(&g);
        if gn <= tol.grad_tol {
            return Ok(MinimizeResult { x, value: f, grad_norm: gn, iterations: it, converged: true, message: None });
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&hinv[i * n..(i + 1) * n], &g)).collect();
        p.project(&mut d);
        if dot(&d, &g) >= 0.0 {
            // lost descent: restart from steepest descent
            hinv.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..n {
                hinv[i * n + i] = 1.0;
            }
            scaled = false;
            d = g.iter().map(|v| -v).collect();
        }
        let pt = match wolfe_search(p, &x, f, &g, &d) {
            Ok(pt) => pt,
            Err(e) => {
                return Ok(MinimizeResult {
                    x,
                    value: f,
                    grad_norm: gn,
                    iterations: it,
                    converged: false,
                    message: Some(e.to_string()),
                })
            }
        };
        let s: Vec<f64> = pt.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = pt.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        x = pt.x;
        f = pt.f;
        g = pt.g;
        if sy > 0.0 {
            if !scaled {
                let gamma = sy / dot(&y, &y);
                for i in 0..n {
                    for j in 0..n {
                        hinv[i * n + j] = if i == j { gamma } else { 0.0 };
                    }
                }
                scaled = true;
            }
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..n).map(|i| dot(&hinv[i * n..(i + 1) * n], &y)).collect();
            let yhy = dot(&y, &hy);
            let c = (1.0 + rho * yhy) * rho;
            for i in 0..n {
                for j in 0..n {
                    hinv[i * n + j] += c * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
    }
    let gn = inf_norm(&g);
    Ok(MinimizeResult {
        x,
        value: f,
        grad_norm: gn,
        iterations: tol.max_iter,
        converged: gn <= tol.grad_tol,
        message: Some("iteration limit reached".into()),
    })
}

/// Largest relative discrepancy between the analytic gradient (and Hessian,
/// when present) and central differences with step `h`.
pub fn gradient_check<P: MinimizeProblem + ?Sized>(p: &P, x: &[f64], h: f64) -> Result<f64> {
    let g = p.gradient(x)?;
    let n = x.len();
    let mut fd = vec![0.0; n];
    for i in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        fd[i] = (p.objective(&xp)? - p.objective(&xm)?) / (2.0 * h);
    }
    let scale = inf_norm(&fd).max(inf_norm(&g)).max(f64::MIN_POSITIVE);
    let mut err = fd.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
    if let Some(hm) = p.hessian(x)? {
        // Hessian-vector product along a fixed direction
        let v: Vec<f64> = (0..n).map(|i| ((i as f64 + 1.0) * 0.618).sin()).collect();
        let hv = hm.mul_vec(&v);
        let gp = p.gradient(&axpy(x, h, &v))?;
        let gm = p.gradient(&axpy(x, -h, &v))?;
        let fdv: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let s = inf_norm(&fdv).max(inf_norm(&hv)).max(f64::MIN_POSITIVE);
        err = err.max(fdv.iter().zip(&hv).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / s);
    }
    Ok(err)
}
