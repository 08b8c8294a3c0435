//! Command-line front end: configuration, artifacts and sweeps.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure,
//! 4 validation failure.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::driver::{picard_solve, reconstruct_physical, Diagnostics, IterRecord, SolutionBundle, SolveConfig};
use crate::error::{Error, Result};
use crate::operators::{DropContext, XNorm};
use crate::radial::Phase;
use crate::sphere::lm_of;
use crate::validate::{format_table, run_validation, CheckOutcome, ValidateOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

/// Environment variable consulted when `--threads` is absent.
pub const THREADS_ENV: &str = "DROP_STEADY_THREADS";

#[derive(Debug, Parser)]
#[command(name = "drop-steady", version, about = "Spectral solver for a steady falling drop")]
pub struct Cli {
    /// Worker threads (falls back to DROP_STEADY_THREADS, then all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for one drop and write the manifest, shape and profiles.
    Solve {
        /// TOML configuration, or a manifest.json from an earlier run.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write per-mode coefficient tables.
        #[arg(long)]
        coefficients: bool,
    },
    /// Run the self-checks that need no full solve.
    Validate {
        /// Run a single check.
        #[arg(long)]
        only: Option<String>,
        /// Write the table as JSON into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Test hook: scale μ₂ inside the Hadamard–Rybczynski reference.
        #[arg(long, hide = true)]
        inject_hr_fault: Option<f64>,
    },
    /// Solve over a list of density contrasts.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Comma-separated ρ̃ values (overrides `[sweep] rho_tilde`).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rho: Option<Vec<f64>>,
    },
}

/// Physical constants section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub rho_tilde: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub sigma: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        let d = SolveConfig::default();
        Self { rho_tilde: d.rho_tilde, mu1: d.mu1, mu2: d.mu2, sigma: d.sigma }
    }
}

/// Iteration and discretization section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub alpha: f64,
    pub q: f64,
    pub r: f64,
    pub max_iters: usize,
    pub tol_fixed_point: f64,
    pub lmax: usize,
    pub n_int: Option<usize>,
    pub n_ext: Option<usize>,
    pub enforce_ball: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolveConfig::default();
        Self {
            alpha: d.alpha,
            q: d.q,
            r: d.r,
            max_iters: d.max_iters,
            tol_fixed_point: d.tol_fixed_point,
            lmax: d.lmax,
            n_int: d.n_int,
            n_ext: d.n_ext,
            enforce_ball: d.enforce_ball,
        }
    }
}

/// Artifact options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Number of polar samples in `eta.csv`.
    pub eta_samples: usize,
    pub coefficients: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { eta_samples: 181, coefficients: false }
    }
}

/// Sweep grid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub rho_tilde: Vec<f64>,
}

/// Complete run configuration as read from TOML.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub physics: PhysicsSection,
    pub solver: SolverSection,
    pub output: OutputSection,
    pub sweep: SweepSection,
}

impl RunConfig {
    pub fn solve_config(&self) -> SolveConfig {
        let (p, s) = (&self.physics, &self.solver);
        SolveConfig {
            rho_tilde: p.rho_tilde,
            alpha: s.alpha,
            q: s.q,
            r: s.r,
            max_iters: s.max_iters,
            tol_fixed_point: s.tol_fixed_point,
            lmax: s.lmax,
            n_int: s.n_int,
            n_ext: s.n_ext,
            mu1: p.mu1,
            mu2: p.mu2,
            sigma: p.sigma,
            enforce_ball: s.enforce_ball,
        }
    }
}

/// Reads a TOML configuration, or the `config` entry of a run manifest.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let cfg: RunConfig = if path.extension().is_some_and(|e| e == "json") {
        let v: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let c = v.get("config").cloned().ok_or_else(|| Error::Config(format!("{}: no `config` entry", path.display())))?;
        serde_json::from_value(c).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    };
    cfg.solve_config().validate()?;
    Ok(cfg)
}

/// Record of one `solve` run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub version: &'static str,
    pub threads: usize,
    pub timing_seconds: f64,
    pub lambda0: f64,
    pub lambda: f64,
    pub r_trunc: f64,
    pub contraction: f64,
    pub residual: f64,
    pub x_norm: XNorm,
    pub history: Vec<IterRecord>,
    pub diagnostics: Diagnostics,
    pub files: Vec<String>,
}

/// One row of `sweep.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub rho_tilde: f64,
    pub lambda: f64,
    pub eta_norm: f64,
    pub contraction_ratio: f64,
    pub wake_coefficient: f64,
    pub force_defect: f64,
    pub status: String,
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let pool = match cli.threads {
        Some(0) => return report_error(None, &Error::Config("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => return report_error(None, &Error::Config(format!("thread pool: {e}"))),
    };
    pool.install(|| match &cli.command {
        Command::Solve { config, out, coefficients } => {
            finish(Some(out), cmd_solve(config, out, *coefficients, pool.current_num_threads()))
        }
        Command::Validate { only, out, inject_hr_fault } => {
            let opts = ValidateOptions {
                only: only.clone(),
                hr_mu2_fault: inject_hr_fault.unwrap_or(1.0),
                ..ValidateOptions::default()
            };
            match cmd_validate(&opts, out.as_deref()) {
                Ok(true) => EXIT_OK,
                Ok(false) => EXIT_VALIDATION,
                Err(e) => report_error(out.as_deref(), &e),
            }
        }
        Command::Sweep { config, out, rho } => finish(Some(out), cmd_sweep(config, out, rho.as_deref())),
    })
}

fn finish(out: Option<&Path>, r: Result<()>) -> i32 {
    match r {
        Ok(()) => EXIT_OK,
        Err(e) => report_error(out, &e),
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parameter(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

/// Prints a JSON error record to stderr and, if possible, writes `error.json`.
fn report_error(out: Option<&Path>, e: &Error) -> i32 {
    let code = exit_code(e);
    let kind = if code == EXIT_CONFIG { "config" } else { "solver" };
    let rec = serde_json::json!({ "status": "error", "kind": kind, "exit_code": code, "message": e.to_string() });
    eprintln!("{rec}");
    if let Some(dir) = out {
        if fs::create_dir_all(dir).is_ok() {
            let _ = fs::write(dir.join("error.json"), format!("{rec:#}\n"));
        }
    }
    code
}

/// `solve`: one drop, manifest plus CSV artifacts.
pub fn cmd_solve(config: &Path, out: &Path, coefficients: bool, threads: usize) -> Result<()> {
    let cfg = load_config(config)?;
    let start = Instant::now();
    let bundle = picard_solve(&cfg.solve_config())?;
    let timing_seconds = start.elapsed().as_secs_f64();
    fs::create_dir_all(out)?;
    let mut files = vec!["manifest.json".to_string(), "eta.csv".into(), "profiles.csv".into(), "diagnostics.json".into()];
    write_eta_csv(&out.join("eta.csv"), &bundle, cfg.output.eta_samples)?;
    let ctx = DropContext::new(
        std::sync::Arc::new(bundle.config.discretization()),
        bundle.config.params()?,
        bundle.r_trunc,
    )?;
    write_profiles_csv(&out.join("profiles.csv"), &ctx, &bundle)?;
    if coefficients || cfg.output.coefficients {
        write_coefficients_csv(&out.join("coefficients.csv"), &ctx, &bundle)?;
        files.push("coefficients.csv".into());
    }
    fs::write(out.join("diagnostics.json"), to_json(&bundle.report)?)?;
    let manifest = RunManifest {
        config: cfg,
        version: env!("CARGO_PKG_VERSION"),
        threads,
        timing_seconds,
        lambda0: bundle.lambda0,
        lambda: bundle.lambda,
        r_trunc: bundle.r_trunc,
        contraction: bundle.contraction,
        residual: bundle.residual,
        x_norm: bundle.x_norm,
        history: bundle.history.clone(),
        diagnostics: bundle.report.clone(),
        files,
    };
    fs::write(out.join("manifest.json"), to_json(&manifest)?)?;
    println!(
        "converged in {} steps: λ = {:.6e}, ‖x‖ = {:.3e}, contraction {:.3e}",
        bundle.history.len(),
        bundle.lambda,
        bundle.x_norm.total(),
        bundle.contraction
    );
    Ok(())
}

/// `validate`: prints the table; `Ok(false)` when a check fails.
pub fn cmd_validate(opts: &ValidateOptions, out: Option<&Path>) -> Result<bool> {
    let rows: Vec<CheckOutcome> = run_validation(opts)?;
    print!("{}", format_table(&rows));
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("validation.json"), to_json(&rows)?)?;
    }
    Ok(rows.iter().all(|r| r.passed))
}

/// `sweep`: independent solves over a ρ̃ grid; failures are recorded per row.
pub fn cmd_sweep(config: &Path, out: &Path, rho: Option<&[f64]>) -> Result<()> {
    let cfg = load_config(config)?;
    let grid = rho.map_or_else(|| cfg.sweep.rho_tilde.clone(), <[f64]>::to_vec);
    let rows = sweep(&cfg.solve_config(), &grid);
    fs::create_dir_all(out)?;
    let mut w = csv::Writer::from_path(out.join("sweep.csv")).map_err(csv_err)?;
    w.write_record(["rho_tilde", "lambda", "eta_norm", "contraction_ratio", "wake_coefficient", "force_defect", "status"])
        .map_err(csv_err)?;
    for r in &rows {
        let mut rec: Vec<String> =
            [r.rho_tilde, r.lambda, r.eta_norm, r.contraction_ratio, r.wake_coefficient, r.force_defect]
                .iter()
                .map(|v| fmt17(*v))
                .collect();
        rec.push(r.status.clone());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    println!("sweep: {} points, {failed} failed", rows.len());
    Ok(())
}

/// Solves every grid point in parallel, each in its own context.
pub fn sweep(base: &SolveConfig, grid: &[f64]) -> Vec<SweepRow> {
    grid.par_iter()
        .map(|&rho_tilde| {
            let cfg = SolveConfig { rho_tilde, ..base.clone() };
            match cfg.validate().and_then(|_| picard_solve(&cfg)) {
                Ok(b) => SweepRow {
                    rho_tilde,
                    lambda: b.lambda,
                    eta_norm: b.x_norm.eta,
                    contraction_ratio: b.contraction,
                    wake_coefficient: b.report.wake_coefficient,
                    force_defect: b.report.force_defect,
                    status: "ok".into(),
                },
                Err(e) => SweepRow {
                    rho_tilde,
                    lambda: f64::NAN,
                    eta_norm: f64::NAN,
                    contraction_ratio: f64::NAN,
                    wake_coefficient: f64::NAN,
                    force_defect: f64::NAN,
                    status: format!("failed: {e}"),
                },
            }
        })
        .collect()
}

/// Full double precision (17 significant digits).
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Io(std::io::Error::other(e)))
}

fn write_rows<S: Display>(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<S>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.iter().map(|s| s.to_string())).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `theta, eta` along the meridian `φ = 0`.
fn write_eta_csv(path: &Path, b: &SolutionBundle, n: usize) -> Result<()> {
    let n = n.max(2);
    let rows = (0..n).map(|i| {
        let theta = std::f64::consts::PI * i as f64 / (n - 1) as f64;
        vec![fmt17(theta), fmt17(b.state.eta.eval(theta, 0.0))]
    });
    write_rows(path, &["theta", "eta"], rows)
}

/// Per-shell summaries of the physical fields on the reference domain.
fn write_profiles_csv(path: &Path, ctx: &DropContext, b: &SolutionBundle) -> Result<()> {
    let disc = ctx.disc();
    let phys = reconstruct_physical(ctx, &b.state)?;
    let wg = phys.w.to_grid(disc);
    let qg = phys.q.to_grid(disc);
    let wts = &disc.sphere.grid.weights;
    let area = 4.0 * std::f64::consts::PI;
    let rows = (0..disc.n_shells()).map(|s| {
        let mean = |f: &dyn Fn(usize) -> f64| wts.iter().enumerate().map(|(k, w)| w * f(k)).sum::<f64>() / area;
        let w_rms = mean(&|k| wg[s][k].iter().map(|v| v * v).sum()).sqrt();
        let w3 = mean(&|k| wg[s][k][2]);
        let q_mean = mean(&|k| qg[s][k]);
        let q_rms = mean(&|k| qg[s][k] * qg[s][k]).sqrt();
        let phase = if disc.radial.phase(s) == Phase::Interior { "interior" } else { "exterior" };
        vec![s.to_string(), fmt17(disc.radial.r[s]), phase.to_string(), fmt17(w_rms), fmt17(w3), fmt17(q_mean), fmt17(q_rms)]
    });
    write_rows(path, &["shell", "r", "phase", "velocity_rms", "axial_velocity_mean", "pressure_mean", "pressure_rms"], rows)
}

/// `field, shell, r, l, m, value` for every stored mode (`shell = -1` for `η`).
fn write_coefficients_csv(path: &Path, ctx: &DropContext, b: &SolutionBundle) -> Result<()> {
    let disc = ctx.disc();
    let x = &b.state;
    let mut rows = Vec::new();
    let mut push = |name: &str, shell: i64, r: f64, coeffs: &[f64]| {
        for (k, v) in coeffs.iter().enumerate() {
            let (l, m) = lm_of(k);
            rows.push(vec![name.to_string(), shell.to_string(), fmt17(r), l.to_string(), m.to_string(), fmt17(*v)]);
        }
    };
    for s in 0..disc.n_shells() {
        let r = disc.radial.r[s];
        let (ur, t) = x.u.shell(s);
        push("u_radial", s as i64, r, &ur.coeffs);
        push("u_poloidal", s as i64, r, &t.v);
        push("u_toroidal", s as i64, r, &t.w);
        push("p", s as i64, r, &x.p.shell(s).coeffs);
    }
    push("eta", -1, 1.0, &x.eta.coeffs);
    write_rows(path, &["field", "shell", "r", "l", "m", "value"], rows.into_iter())
}
