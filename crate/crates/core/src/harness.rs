//! Study configuration, refinement sweeps, slope fits and report files.

use crate::analysis::{band_grid, stability_constants, symbol_row, StabilityReport};
use crate::atomistic::{AtomisticSolution, AtomisticSystem};
use crate::continuum::{consistency_residual, ContinuumModel, Variant};
use crate::error::{Error, Result};
use crate::fem::{energy_gap, grad_l2_distance, solve_continuum, ContinuumSolution, PeriodicSplineSpace};
use crate::field::{FourierField, SmoothField};
use crate::lattice::{pi_interpolant, PeriodicLatticeField};
use crate::optimize::{Method, Tolerances};
use crate::potentials::{InteractionRange, PairPotential, PotentialKind};
use crate::splines::{measurement_interpolant, InterpKind, ReproducingKernel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptConfig {
    pub method: Method,
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        OptConfig { method: Method::Newton, grad_tol: t.grad_tol, max_iter: t.max_iter }
    }
}

impl OptConfig {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances { grad_tol: self.grad_tol, max_iter: self.max_iter }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub potential: PotentialKind,
    pub scale: f64,
    pub morse_a: f64,
    pub r_cut: usize,
    pub deformation: f64,
    pub models: Vec<Variant>,
    pub eps_list: Vec<f64>,
    /// Smallest ε used in slope fits.
    pub eps_min: f64,
    pub interp: InterpKind,
    /// Finite elements per lattice spacing.
    pub refine: usize,
    pub opt: OptConfig,
    pub out: PathBuf,
    pub consistency_n: Vec<usize>,
    pub consistency_amplitude: f64,
    pub samples_per_cell: usize,
    pub stability_kmax: f64,
    pub stability_points: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            potential: PotentialKind::Harmonic,
            scale: 1.0,
            morse_a: 4.0,
            r_cut: 2,
            deformation: 1.0,
            models: vec![Variant::CauchyBorn, Variant::Hoc4],
            eps_list: (3..=10).map(|k| 2f64.powi(-k)).collect(),
            eps_min: 2f64.powi(-8),
            interp: InterpKind::QuarticSpline,
            refine: 1,
            opt: OptConfig::default(),
            out: PathBuf::from("out"),
            consistency_n: vec![8, 16, 32, 64, 128],
            consistency_amplitude: 0.1,
            samples_per_cell: 8,
            stability_kmax: 1.0,
            stability_points: 10_000,
        }
    }
}

impl StudyConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: StudyConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() || self.eps_list.is_empty() {
            return Err(Error::Config("model and ε lists must be nonempty".into()));
        }
        self.half_periods()?;
        if self.refine == 0 || self.samples_per_cell == 0 {
            return Err(Error::Config("refine and samples_per_cell must be positive".into()));
        }
        Ok(())
    }

    pub fn pair_potential(&self) -> Result<PairPotential> {
        PairPotential::new(self.potential, self.scale, self.morse_a)
    }

    pub fn range(&self) -> Result<InteractionRange> {
        InteractionRange::new(self.r_cut)
    }

    /// `N = 1/ε` for every entry of the ε list.
    pub fn half_periods(&self) -> Result<Vec<usize>> {
        self.eps_list.iter().map(|&e| half_period_of(e)).collect()
    }

    pub fn system(&self, n: usize) -> Result<AtomisticSystem> {
        let force = crate::atomistic::standard_force(n).project_mean_zero();
        AtomisticSystem::new(&self.pair_potential()?, self.deformation, self.range()?, force)
    }
}

/// `N` with `ε = 1/N`, rejecting non-integer reciprocals.
pub fn half_period_of(eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Config(format!("ε = {eps} outside (0, 1]")));
    }
    let n = (1.0 / eps).round();
    if (n * eps - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("1/ε is not an integer for ε = {eps}")));
    }
    Ok(n as usize)
}

/// Parses `0.125`, `1/8` or `2^-3`.
pub fn parse_eps(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot parse ε '{s}'"));
    if let Some((b, e)) = s.split_once('^') {
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        let e: i32 = e.trim().parse().map_err(|_| bad())?;
        return Ok(b.powi(e));
    }
    if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        return Ok(a / b);
    }
    s.parse().map_err(|_| bad())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub model: Variant,
    pub eps: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// `‖∇I u^a − ∇u‖_{L²}` in scaled units.
    pub grad_error: f64,
    /// Total-energy difference in scaled units.
    pub energy_gap: f64,
    pub converged: bool,
    #[serde(skip)]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Least squares of `log e` against `log ε`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::Fit(format!("nonpositive value in ({}, {})", p.0, p.1)));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(SlopeFit { slope, intercept, r2, points: points.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFit {
    pub model: Variant,
    pub metric: &'static str,
    #[serde(flatten)]
    pub fit: SlopeFit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub records: Vec<ConvergenceRecord>,
    pub fits: Vec<ModelFit>,
    pub method: Method,
}

/// Atomistic solution and one continuum solution per model at a single `N`.
pub struct SolvedCell {
    pub n: usize,
    pub system: AtomisticSystem,
    pub atomistic: AtomisticSolution,
    pub continuum: Vec<(Variant, Result<ContinuumSolution>)>,
}

pub fn solve_cell(cfg: &StudyConfig, n: usize) -> Result<SolvedCell> {
    let sys = cfg.system(n)?;
    let tol = cfg.opt.tolerances();
    let atomistic = sys.solve(cfg.opt.method, tol)?;
    let space = PeriodicSplineSpace::new(n, cfg.refine)?;
    let force = FourierField::cosine(n, 1.0 / n as f64, 1);
    let continuum = cfg
        .models
        .iter()
        .map(|&v| {
            let m = ContinuumModel::for_system(v, &sys);
            (v, solve_continuum(&m, &space, &force, cfg.opt.method, tol))
        })
        .collect();
    Ok(SolvedCell { n, system: sys, atomistic, continuum })
}

fn failed(model: Variant, n: usize, msg: String) -> ConvergenceRecord {
    ConvergenceRecord {
        model,
        eps: 1.0 / n as f64,
        n,
        grad_error: f64::NAN,
        energy_gap: f64::NAN,
        converged: false,
        message: Some(msg),
    }
}

fn measure_cell(cfg: &StudyConfig, n: usize) -> Vec<ConvergenceRecord> {
    let cell = match solve_cell(cfg, n) {
        Ok(c) => c,
        Err(e) => return cfg.models.iter().map(|&m| failed(m, n, e.to_string())).collect(),
    };
    let eps = 1.0 / n as f64;
    let space = match PeriodicSplineSpace::new(n, cfg.refine) {
        Ok(s) => s,
        Err(e) => return cfg.models.iter().map(|&m| failed(m, n, e.to_string())).collect(),
    };
    let iu = match measurement_interpolant(&cell.atomistic.displacement, cfg.interp) {
        Ok(f) => f,
        Err(e) => return cfg.models.iter().map(|&m| failed(m, n, e.to_string())).collect(),
    };
    cell.continuum
        .into_iter()
        .map(|(model, sol)| match sol {
            Ok(sol) => {
                let grad = grad_l2_distance(&iu, &sol.field, &space);
                match energy_gap(&cell.system, cell.atomistic.displacement.values(), &sol) {
                    Ok(gap) => ConvergenceRecord {
                        model,
                        eps,
                        n,
                        grad_error: grad * eps.sqrt(),
                        energy_gap: gap * eps,
                        converged: cell.atomistic.converged && sol.converged,
                        message: None,
                    },
                    Err(e) => failed(model, n, e.to_string()),
                }
            }
            Err(e) => failed(model, n, e.to_string()),
        })
        .collect()
}

/// Fit of `metric` over converged rows with `ε ≥ eps_min`.
pub fn fit_records(records: &[ConvergenceRecord], model: Variant, eps_min: f64, metric: &str) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.model == model && r.converged && r.eps >= eps_min * (1.0 - 1e-12))
        .map(|r| (r.eps, if metric == "energy_gap" { r.energy_gap } else { r.grad_error }))
        .collect();
    fit_slope(&pts)
}

/// Runs every `(ε, model)` cell; records are ordered by decreasing ε, then model.
pub fn run_sweep(cfg: &StudyConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let ns = cfg.half_periods()?;
    let cells: Vec<Vec<ConvergenceRecord>> = ns.par_iter().map(|&n| measure_cell(cfg, n)).collect();
    let mut records: Vec<ConvergenceRecord> = cells.into_iter().flatten().collect();
    records.sort_by(|a, b| b.eps.total_cmp(&a.eps).then(a.model.cmp(&b.model)));
    let mut fits = Vec::new();
    for &model in &cfg.models {
        for metric in ["grad_error", "energy_gap"] {
            if let Ok(fit) = fit_records(&records, model, cfg.eps_min, metric) {
                fits.push(ModelFit { model, metric, fit });
            }
        }
    }
    Ok(SweepReport { records, fits, method: cfg.opt.method })
}

pub fn records_csv(records: &[ConvergenceRecord]) -> String {
    let mut s = String::from("model,eps,N,grad_error,energy_gap,converged\n");
    for r in records {
        let _ = writeln!(s, "{},{:e},{},{:e},{:e},{}", r.model, r.eps, r.n, r.grad_error, r.energy_gap, r.converged);
    }
    s
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))
}

pub fn write_sweep(report: &SweepReport, dir: &Path) -> Result<()> {
    write(dir, "records.csv", &records_csv(&report.records))?;
    #[derive(Serialize)]
    struct FitFile<'a> {
        method: Method,
        fits: &'a [ModelFit],
    }
    write(dir, "fit.json", &to_json(&FitFile { method: report.method, fits: &report.fits })?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub model: Variant,
    #[serde(rename = "N")]
    pub n: usize,
    pub max_residual: f64,
    pub l2_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub rows: Vec<ConsistencyRow>,
    pub fits: Vec<(Variant, SlopeFit)>,
}

/// Kernel used to localize the atomistic stress for a model.
pub fn kernel_for(model: Variant) -> &'static ReproducingKernel {
    match model {
        Variant::Hoc6 => ReproducingKernel::quintic(),
        _ => ReproducingKernel::cubic(),
    }
}

/// `max_x |R|` and `‖R‖_{L²}` on `samples_per_cell` points per lattice cell.
pub fn consistency_row(cfg: &StudyConfig, model: Variant, n: usize) -> Result<ConsistencyRow> {
    let sys = AtomisticSystem::new(&cfg.pair_potential()?, cfg.deformation, cfg.range()?, PeriodicLatticeField::zeros(n))?;
    let m = ContinuumModel::for_system(model, &sys);
    let u = FourierField::sine(n, cfg.consistency_amplitude, 1);
    let samples = PeriodicLatticeField::from_fn(n, |x| u.value(x));
    let kernel = kernel_for(model);
    let per = cfg.samples_per_cell;
    let dx = 1.0 / per as f64;
    let vals: Vec<f64> = (0..2 * n * per)
        .into_par_iter()
        .map(|i| consistency_residual(&sys, &m, &u, &samples, kernel, -(n as f64) + i as f64 * dx))
        .collect::<Result<_>>()?;
    let max = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let l2 = (vals.iter().map(|v| v * v).sum::<f64>() * dx).sqrt();
    Ok(ConsistencyRow { model, n, max_residual: max, l2_residual: l2 })
}

pub fn run_consistency(cfg: &StudyConfig) -> Result<ConsistencyReport> {
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &model in &cfg.models {
        let mine: Vec<ConsistencyRow> =
            cfg.consistency_n.iter().map(|&n| consistency_row(cfg, model, n)).collect::<Result<_>>()?;
        let pts: Vec<(f64, f64)> = mine.iter().map(|r| (1.0 / r.n as f64, r.max_residual)).collect();
        if let Ok(f) = fit_slope(&pts) {
            fits.push((model, f));
        }
        rows.extend(mine);
    }
    Ok(ConsistencyReport { rows, fits })
}

pub fn write_consistency(report: &ConsistencyReport, dir: &Path) -> Result<()> {
    let mut s = String::from("model,N,max_residual,l2_residual\n");
    for r in &report.rows {
        let _ = writeln!(s, "{},{},{:e},{:e}", r.model, r.n, r.max_residual, r.l2_residual);
    }
    write(dir, "consistency.csv", &s)?;
    write(dir, "consistency_fit.json", &to_json(&report.fits)?)?;
    Ok(())
}

pub fn run_stability(cfg: &StudyConfig) -> Result<(StabilityReport, Vec<[f64; 5]>)> {
    let pots = crate::potentials::bond_potentials(&cfg.pair_potential()?, cfg.deformation, cfg.range()?)?;
    let hoc = ContinuumModel::from_potentials(Variant::Hoc4, pots.clone());
    let report = stability_constants(&pots, &hoc, cfg.stability_kmax, cfg.stability_points)?;
    let rows = band_grid(cfg.stability_kmax, cfg.stability_points)
        .map(|k| symbol_row(&pots, &hoc, k))
        .collect::<Result<_>>()?;
    Ok((report, rows))
}

pub fn write_stability(report: &StabilityReport, rows: &[[f64; 5]], dir: &Path) -> Result<()> {
    let mut s = String::from("x,phi_a,phi_cb,phi_hoc_taylor,phi_hoc_direct\n");
    for r in rows {
        let _ = writeln!(s, "{:e},{:e},{:e},{:e},{:e}", r[0], r[1], r[2], r[3], r[4]);
    }
    write(dir, "stability.csv", &s)?;
    write(dir, "stability.json", &to_json(report)?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub model: String,
    pub converged: bool,
    /// Scaled `‖∇I u^a − ∇u‖_{L²}`; zero for the atomistic row.
    pub grad_error: f64,
    pub files: Vec<PathBuf>,
}

/// Solves every model at every `N`, writing `solution_<model>_<N>.csv`.
pub fn run_solve(cfg: &StudyConfig) -> Result<Vec<SolveSummary>> {
    let mut out = Vec::new();
    for n in cfg.half_periods()? {
        let cell = solve_cell(cfg, n)?;
        let u = &cell.atomistic.displacement;
        let pi = pi_interpolant(u)?;
        let mut s = String::from("xi,u,grad_pi_u\n");
        for xi in -(n as i64)..n as i64 {
            let _ = writeln!(s, "{},{:e},{:e}", xi, u.at(xi), pi.derivative(1, xi as f64));
        }
        let path = write(&cfg.out, &format!("solution_atomistic_{n}.csv"), &s)?;
        out.push(SolveSummary {
            n,
            model: "atomistic".into(),
            converged: cell.atomistic.converged,
            grad_error: 0.0,
            files: vec![path],
        });
        let space = PeriodicSplineSpace::new(n, cfg.refine)?;
        let iu = measurement_interpolant(u, cfg.interp)?;
        for (v, sol) in cell.continuum {
            let sol = sol?;
            let mut s = String::from("x,u,grad_u,grad3_u\n");
            let h = space.spacing();
            for j in 0..2 * space.dim() {
                let x = -(n as f64) + 0.5 * h * j as f64;
                let f = &sol.field;
                let _ = writeln!(s, "{},{:e},{:e},{:e}", x, f.value(x), f.derivative(1, x), f.derivative(3, x));
            }
            let path = write(&cfg.out, &format!("solution_{v}_{n}.csv"), &s)?;
            let eps = 1.0 / n as f64;
            out.push(SolveSummary {
                n,
                model: v.to_string(),
                converged: sol.converged,
                grad_error: grad_l2_distance(&iu, &sol.field, &space) * eps.sqrt(),
                files: vec![path],
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (3..8).map(|k| 2f64.powi(-k)).map(|e| (e, 7.0 * e.powi(4))).collect();
        let f = fit_slope(&pts).unwrap();
        assert!((f.slope - 4.0).abs() < 1e-10);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let flat: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, 3.0)).collect();
        assert!(fit_slope(&flat).unwrap().slope.abs() < 1e-12);
        assert!(fit_slope(&pts[..2]).is_err());
        assert!(fit_slope(&[(0.1, 1.0), (0.2, 0.0), (0.3, 1.0)]).is_err());
    }

    #[test]
    fn eps_parsing() {
        assert_eq!(parse_eps("2^-3").unwrap(), 0.125);
        assert_eq!(parse_eps("1/16").unwrap(), 0.0625);
        assert_eq!(parse_eps("0.25").unwrap(), 0.25);
        assert!(parse_eps("x").is_err());
        assert!(half_period_of(0.3).is_err());
        assert_eq!(half_period_of(0.125).unwrap(), 8);
    }

    #[test]
    fn config_dotted_keys() {
        let cfg = StudyConfig::from_toml_str(
            "potential = \"lj\"\nmodels = [\"hoc4\", \"cb\"]\neps_list = [0.125, 0.0625, 0.03125]\nopt.method = \"bfgs\"\nopt.grad_tol = 1e-9\n",
        )
        .unwrap();
        assert_eq!(cfg.potential, PotentialKind::LennardJones);
        assert_eq!(cfg.opt.method, Method::Bfgs);
        assert_eq!(cfg.opt.grad_tol, 1e-9);
        assert_eq!(cfg.opt.max_iter, 500);
        assert!(StudyConfig::from_toml_str("bogus = 1").is_err());
    }
}
