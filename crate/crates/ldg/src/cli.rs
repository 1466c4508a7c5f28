//! Command-line front end: `verify`, `minimize`, `analyze` and `sweep`.
//!
//! Exit codes: 0 ok, 1 numerical failure, 2 configuration error, 3 I/O error.

use crate::boundary_data::{BoundarySpec, BoundaryTrace, Profile};
use crate::config::{ConfigError, InitSpec, RunConfig};
use crate::io::{self, RunRecord};
use crate::solver::{minimize, HalfSliceGrid, RunStatus, SolverError, SolverRun};
use crate::topology::{beta_field, classify_field, localization_metric, TopologyError, TopologyReport, Verdict};
use crate::verify::{run_suite, Level, Mutation};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Read { .. } => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Io(_) | SolverError::Csv(_) => CliError::Io(e.to_string()),
            SolverError::BadDomain(_) | SolverError::BadBoundary(_) | SolverError::BadConfig(_) | SolverError::FieldMismatch(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<TopologyError> for CliError {
    fn from(e: TopologyError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "ldg", version, about = "Equivariant Landau-de Gennes lab")]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "LDG_THREADS", global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the analytic identity suite and print a JSON report.
    Verify {
        #[arg(long, default_value = "fast")]
        level: Level,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        mutate: Option<Mutation>,
    },
    /// Minimize the energy for a config and write the run artifacts.
    Minimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `solver.seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Classify the biaxiality level sets of a finished run directory.
    Analyze {
        /// Run directory holding `run.json` and `field.csv`.
        dir: PathBuf,
        /// Where to write the report (default: `<dir>/report.json`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize and classify over a list of parameter values.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Lambda,
    J,
    Mu2,
}

/// Builds the grid and boundary trace of a config.
pub fn setup(cfg: &RunConfig) -> Result<(HalfSliceGrid, BoundaryTrace), CliError> {
    let grid = HalfSliceGrid::new(cfg.domain.clone(), cfg.grid.n_r, cfg.grid.n_z)?;
    let trace = BoundaryTrace::sample(cfg.boundary, &grid).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((grid, trace))
}

/// Minimizes and writes the artifacts into `out`.
pub fn run_minimize(cfg: &RunConfig, out: &Path) -> Result<(SolverRun, RunRecord), CliError> {
    let (grid, trace) = setup(cfg)?;
    let provided = match &cfg.solver.init {
        InitSpec::Provided { path } => Some(io::read_field_csv(path, &grid)?),
        _ => None,
    };
    let run = minimize(&cfg.solver_config(provided), &grid, &trace)?;
    let record = io::write_run_artifacts(out, &run, cfg)?;
    Ok((run, record))
}

/// Reloads a run directory: record, grid, trace and field.
pub fn load_run(dir: &Path) -> Result<(RunRecord, SolverRun), CliError> {
    for name in [io::RUN_JSON, io::FIELD_CSV] {
        if !dir.join(name).is_file() {
            return Err(CliError::Io(format!("missing artifact {}", dir.join(name).display())));
        }
    }
    let record: RunRecord = io::read_json(&dir.join(io::RUN_JSON))?;
    let (grid, trace) = setup(&record.config_echo)?;
    let field = io::read_field_csv(&dir.join(io::FIELD_CSV), &grid)?;
    let mut run = SolverRun::from_field(grid, trace, record.config_echo.solver.lambda, field)?;
    run.status = record.status;
    run.mode = record.config_echo.solver.mode;
    run.energy_history = record.energy_history.clone();
    run.grad_history = record.grad_history.clone();
    Ok((record, run))
}

/// Classifies a run directory and writes `report.json` (or `out`) and `beta.csv`.
pub fn analyze_dir(dir: &Path, out: Option<&Path>) -> Result<TopologyReport, CliError> {
    let (record, run) = load_run(dir)?;
    if !run.is_converged() {
        return Err(CliError::Numerical(format!("run in {} has not converged ({:?})", dir.display(), record.status)));
    }
    let report = classify_field(&run.grid, &run.field, run.trace.degree, &record.config_echo.analysis)?;
    let beta = beta_field(&run.grid, &run.field)?;
    io::write_beta_csv(&dir.join(io::BETA_CSV), &run.grid, &beta.values)?;
    let target = out.map(Path::to_path_buf).unwrap_or_else(|| dir.join(io::REPORT_JSON));
    io::write_json(&target, &report)?;
    Ok(report)
}

/// One row of `sweep.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    /// `converged`, `stalled`, `max_iters` or `error`.
    pub status: String,
    pub energy: Option<f64>,
    pub singularities: Option<usize>,
    pub ring: Option<bool>,
    pub verdict: Option<Verdict>,
    pub localization: Option<f64>,
    pub dir: String,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        self.error.is_none() && matches!(self.status.as_str(), "converged" | "stalled")
    }
}

/// The config of one sweep row.
pub fn apply_param(base: &RunConfig, param: SweepParam, value: f64) -> Result<RunConfig, CliError> {
    let mut cfg = base.clone();
    match param {
        SweepParam::Lambda => cfg.solver.lambda = value,
        SweepParam::J => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(CliError::Config(format!("j = {value} is not a positive integer")));
            }
            match &mut cfg.boundary {
                BoundarySpec::Director { profile: Profile::Torus, j } => *j = Some(value as u32),
                _ => return Err(CliError::Config("sweeping j needs a torus director boundary".into())),
            }
        }
        SweepParam::Mu2 => match &mut cfg.boundary {
            BoundarySpec::FullSphere { mu2, .. } => *mu2 = C::new(value, 0.0),
            _ => return Err(CliError::Config("sweeping mu2 needs a full_sphere boundary".into())),
        },
    }
    cfg.boundary.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

fn status_name(s: RunStatus) -> &'static str {
    match s {
        RunStatus::Converged => "converged",
        RunStatus::MaxIters => "max_iters",
        RunStatus::Stalled => "stalled",
    }
}

fn sweep_row(base: &RunConfig, param: SweepParam, value: f64, dir: &Path) -> Result<SweepRow, CliError> {
    let cfg = apply_param(base, param, value)?;
    let (run, record) = run_minimize(&cfg, dir)?;
    let mut row = SweepRow {
        param,
        value,
        status: status_name(run.status).into(),
        energy: Some(run.energy()),
        singularities: None,
        ring: None,
        verdict: None,
        localization: None,
        dir: dir.display().to_string(),
        error: None,
    };
    if run.is_converged() {
        let report = analyze_dir(dir, None)?;
        let beta = beta_field(&run.grid, &run.field)?;
        row.singularities = Some(report.singularities.len());
        row.ring = Some(report.ring.is_some());
        row.verdict = Some(report.verdict);
        row.localization = Some(localization_metric(&run.grid, &beta, record.config_echo.analysis.localization_rho));
    }
    Ok(row)
}

/// Runs every value, writing `<out>/<param>_<k>/` per row and `<out>/sweep.csv`.
/// Row failures are recorded in the table instead of aborting the sweep.
pub fn run_sweep(base: &RunConfig, param: SweepParam, values: &[f64], out: &Path) -> Result<Vec<SweepRow>, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let tag = match param {
        SweepParam::Lambda => "lambda",
        SweepParam::J => "j",
        SweepParam::Mu2 => "mu2",
    };
    let mut rows = Vec::new();
    for (k, &value) in values.iter().enumerate() {
        let dir = out.join(format!("{tag}_{k:03}"));
        eprintln!("sweep {tag} = {value} -> {}", dir.display());
        let row = sweep_row(base, param, value, &dir).unwrap_or_else(|e| SweepRow {
            param,
            value,
            status: "error".into(),
            energy: None,
            singularities: None,
            ring: None,
            verdict: None,
            localization: None,
            dir: dir.display().to_string(),
            error: Some(e.to_string()),
        });
        rows.push(row);
    }
    let path = out.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(e.to_string()))?;
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(rows)
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = seed {
        cfg.solver.seed = s;
    }
    Ok(cfg)
}

fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Verify { level, out, mutate } => {
            let report = run_suite(level, mutate);
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            println!("{json}");
            if let Some(p) = out {
                io::write_json(&p, &report)?;
            }
            let failed: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Numerical(format!("failing checks: {}", failed.join(", "))))
            }
        }
        Command::Minimize { config, out, seed } => {
            let cfg = load_config(&config, seed)?;
            let (run, record) = run_minimize(&cfg, &out)?;
            println!(
                "status {:?} after {} iterations, energy {:.8} ({:.6} x 4pi), {} axis singularities",
                run.status,
                record.iterations,
                run.energy(),
                run.energy() / (4.0 * std::f64::consts::PI),
                record.singularities.len()
            );
            if run.is_converged() {
                Ok(())
            } else {
                Err(CliError::Numerical(format!("not converged after {} iterations; artifacts written", record.iterations)))
            }
        }
        Command::Analyze { dir, out } => {
            let report = analyze_dir(&dir, out.as_deref())?;
            println!(
                "verdict {:?}: {} singularities, ring {}, linking {}",
                report.verdict,
                report.singularities.len(),
                report.ring.map_or("none".to_string(), |r| format!("at ({:.4}, {:.4}) beta {:.4}", r.r, r.z, r.beta)),
                report.linking
            );
            Ok(())
        }
        Command::Sweep { config, param, values, out, seed } => {
            let cfg = load_config(&config, seed)?;
            let rows = run_sweep(&cfg, param, &values, &out)?;
            for r in &rows {
                println!(
                    "{} = {}: {} energy {} verdict {}",
                    match param {
                        SweepParam::Lambda => "lambda",
                        SweepParam::J => "j",
                        SweepParam::Mu2 => "mu2",
                    },
                    r.value,
                    r.status,
                    r.energy.map_or("-".into(), |e| format!("{e:.6}")),
                    r.verdict.map_or("-".into(), |v| format!("{v:?}")),
                );
            }
            let bad = rows.iter().filter(|r| !r.ok()).count();
            if bad == 0 {
                Ok(())
            } else {
                Err(CliError::Numerical(format!("{bad} of {} sweep rows failed", rows.len())))
            }
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli.command)),
            Err(e) => Err(CliError::Config(format!("cannot build a pool of {n} threads: {e}"))),
        },
        None => execute(cli.command),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
