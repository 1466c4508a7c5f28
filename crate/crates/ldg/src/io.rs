//! Artifact files: the field dump, the run record and the energy history.
//!
//! `field.csv` has the header `r,z,f0,f1re,f1im,f2re,f2im`, one row per active node in
//! z-outer row-major order. Floats are written in shortest round-trip form, so dumps are
//! bitwise reproducible and reload exactly.

use crate::config::RunConfig;
use crate::solver::diagnostics::AxisSingularity;
use crate::solver::{EquivariantField, HalfSliceGrid, RunStatus, SolverError, SolverRun};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const FIELD_CSV: &str = "field.csv";
pub const RUN_JSON: &str = "run.json";
pub const ENERGY_CSV: &str = "energy_history.csv";
pub const TIMING_JSON: &str = "timing.json";
pub const REPORT_JSON: &str = "report.json";
pub const BETA_CSV: &str = "beta.csv";

pub const FIELD_HEADER: [&str; 7] = ["r", "z", "f0", "f1re", "f1im", "f2re", "f2im"];

pub fn write_field_csv(path: &Path, grid: &HalfSliceGrid, field: &EquivariantField) -> Result<(), SolverError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(FIELD_HEADER)?;
    for (n, v) in grid.nodes.iter().zip(&field.values) {
        let row = [n.r, n.z, v[0], v[1], v[2], v[3], v[4]];
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a field dump and checks its node positions against `grid`.
pub fn read_field_csv(path: &Path, grid: &HalfSliceGrid) -> Result<EquivariantField, SolverError> {
    let mut rd = csv::Reader::from_path(path)?;
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != FIELD_HEADER {
        return Err(SolverError::FieldMismatch(format!("unexpected header {header:?}")));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (k, rec) in rd.records().enumerate() {
        let rec = rec?;
        let x: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| SolverError::FieldMismatch(format!("row {}: {e}", k + 2)))?;
        if x.len() != 7 {
            return Err(SolverError::FieldMismatch(format!("row {} has {} columns", k + 2, x.len())));
        }
        let n = grid
            .nodes
            .get(k)
            .ok_or_else(|| SolverError::FieldMismatch(format!("more rows than the {} grid nodes", grid.len())))?;
        if (n.r - x[0]).abs() > 1e-9 || (n.z - x[1]).abs() > 1e-9 {
            return Err(SolverError::FieldMismatch(format!("row {} at ({}, {}) but node at ({}, {})", k + 2, x[0], x[1], n.r, n.z)));
        }
        values.push([x[2], x[3], x[4], x[5], x[6]]);
    }
    if values.len() != grid.len() {
        return Err(SolverError::FieldMismatch(format!("{} rows for {} nodes", values.len(), grid.len())));
    }
    Ok(EquivariantField { values })
}

/// The run record; wall time is kept out of it (see `timing.json`) so records are reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub energy_history: Vec<f64>,
    pub grad_history: Vec<f64>,
    pub singularities: Vec<AxisSingularity>,
    pub config_echo: RunConfig,
    pub status: RunStatus,
    pub converged: bool,
    pub energy: f64,
    pub iterations: usize,
}

impl RunRecord {
    pub fn new(run: &SolverRun, config: &RunConfig) -> Self {
        let singularities = if run.is_converged() {
            crate::solver::diagnostics::axis_singularities(&run.grid, &run.field)
        } else {
            Vec::new()
        };
        Self {
            energy_history: run.energy_history.clone(),
            grad_history: run.grad_history.clone(),
            singularities,
            config_echo: config.clone(),
            status: run.status,
            converged: run.is_converged(),
            energy: run.energy(),
            iterations: run.energy_history.len().saturating_sub(1),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), SolverError> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(std::io::Error::other)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, SolverError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| SolverError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))
}

pub fn write_energy_csv(path: &Path, run: &SolverRun) -> Result<(), SolverError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "energy", "grad_norm"])?;
    for (k, e) in run.energy_history.iter().enumerate() {
        let g = run.grad_history.get(k).copied().unwrap_or(f64::NAN);
        w.write_record([k.to_string(), e.to_string(), g.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `r,z,beta` for every active node.
pub fn write_beta_csv(path: &Path, grid: &HalfSliceGrid, beta: &[f64]) -> Result<(), SolverError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["r", "z", "beta"])?;
    for (n, b) in grid.nodes.iter().zip(beta) {
        w.write_record([n.r.to_string(), n.z.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every minimize artifact into `dir`.
pub fn write_run_artifacts(dir: &Path, run: &SolverRun, config: &RunConfig) -> Result<RunRecord, SolverError> {
    std::fs::create_dir_all(dir)?;
    write_field_csv(&dir.join(FIELD_CSV), &run.grid, &run.field)?;
    let record = RunRecord::new(run, config);
    write_json(&dir.join(RUN_JSON), &record)?;
    write_energy_csv(&dir.join(ENERGY_CSV), run)?;
    write_json(&dir.join(TIMING_JSON), &serde_json::json!({ "wall_time_s": run.wall_time }))?;
    Ok(record)
}
