use anyhow::{Context, Result};
use chain_elastica::continuum::Variant;
use chain_elastica::harness::{
    parse_eps, run_consistency, run_solve, run_stability, run_sweep, write_consistency, write_stability,
    write_sweep, StudyConfig,
};
use chain_elastica::optimize::Method;
use chain_elastica::potentials::PotentialKind;
use chain_elastica::splines::InterpKind;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "chain-elastica", version, about = "Atomistic chain and higher-order continuum models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the atomistic and continuum problems and write the displacement fields.
    Solve(Common),
    /// Refinement study of gradient errors and energy gaps.
    Sweep(Common),
    /// Fourier symbols and stability constants at the reference state.
    Stability(Common),
    /// Stress consistency residuals on a smooth test field.
    Consistency(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated continuum models (cb, hoc4, hoc6, ill2, fir).
    #[arg(long, value_delimiter = ',')]
    model: Vec<Variant>,
    /// harmonic, lj or morse.
    #[arg(long)]
    potential: Option<PotentialKind>,
    /// Comma-separated ε values (0.125, 1/8 or 2^-3).
    #[arg(long, value_delimiter = ',', value_parser = parse_eps_arg)]
    eps_list: Vec<f64>,
    /// Measurement interpolant: pi, cubic or quartic.
    #[arg(long)]
    interp: Option<InterpKind>,
    /// Optimizer: newton or bfgs.
    #[arg(long)]
    opt: Option<Method>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Smallest ε used in slope fits.
    #[arg(long, value_parser = parse_eps_arg)]
    eps_min: Option<f64>,
    /// Interaction range r_cut.
    #[arg(long)]
    r_cut: Option<usize>,
}

fn parse_eps_arg(s: &str) -> Result<f64, String> {
    parse_eps(s).map_err(|e| e.to_string())
}

impl Common {
    fn config(&self) -> Result<StudyConfig> {
        let mut cfg = match &self.config {
            Some(p) => StudyConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => StudyConfig::default(),
        };
        if !self.model.is_empty() {
            cfg.models = self.model.clone();
        }
        if let Some(p) = self.potential {
            cfg.potential = p;
        }
        if !self.eps_list.is_empty() {
            cfg.eps_list = self.eps_list.clone();
        }
        if let Some(i) = self.interp {
            cfg.interp = i;
        }
        if let Some(m) = self.opt {
            cfg.opt.method = m;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(e) = self.eps_min {
            cfg.eps_min = e;
        }
        if let Some(r) = self.r_cut {
            cfg.r_cut = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(c) => {
            let cfg = c.config()?;
            for s in run_solve(&cfg)? {
                println!(
                    "N={:<5} {:<10} converged={} grad_error={:.3e} -> {}",
                    s.n,
                    s.model,
                    s.converged,
                    s.grad_error,
                    s.files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ")
                );
            }
        }
        Command::Sweep(c) => {
            let cfg = c.config()?;
            let report = run_sweep(&cfg)?;
            write_sweep(&report, &cfg.out)?;
            for r in &report.records {
                println!(
                    "{:<5} eps={:<12e} grad_error={:.4e} energy_gap={:.4e} converged={}",
                    r.model, r.eps, r.grad_error, r.energy_gap, r.converged
                );
            }
            for f in &report.fits {
                println!("fit {:<5} {:<11} slope={:.4} r2={:.6} points={}", f.model, f.metric, f.fit.slope, f.fit.r2, f.fit.points);
            }
        }
        Command::Stability(c) => {
            let cfg = c.config()?;
            let (report, rows) = run_stability(&cfg)?;
            write_stability(&report, &rows, &cfg.out)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Consistency(c) => {
            let cfg = c.config()?;
            let report = run_consistency(&cfg)?;
            write_consistency(&report, &cfg.out)?;
            for r in &report.rows {
                println!("{:<5} N={:<5} max|R|={:.4e} L2|R|={:.4e}", r.model, r.n, r.max_residual, r.l2_residual);
            }
            for (m, f) in &report.fits {
                println!("fit {:<5} order={:.4} r2={:.6}", m, f.slope, f.r2);
            }
        }
    }
    Ok(())
}
