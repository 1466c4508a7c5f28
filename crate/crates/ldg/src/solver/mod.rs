//! Minimization of the reduced energy over S1-equivariant unit-norm fields on the
//! meridian half-slice of an axisymmetric domain.

pub mod diagnostics;
pub mod energy;
pub mod field;
pub mod grid;
pub mod minimize;

use crate::boundary_data::BoundaryTrace;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diagnostics::{
    detect_singularities, fit_tangent_map, monotonicity_profile, AxisSingularity, TangentFit,
};
pub use energy::{discrete_energy, discrete_gradient, EnergyModel, Mode};
pub use field::EquivariantField;
pub use grid::{Domain, HalfSliceGrid, NodeKind};
pub use minimize::{dipole_seed, homogeneous_extension, initial_field, minimize};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("bad domain: {0}")]
    BadDomain(String),
    #[error("node {node} has norm {norm}, off the unit sphere")]
    NormViolation { node: usize, norm: f64 },
    #[error("energy increased at the minimal step (iteration {iteration}, energy {energy})")]
    Diverged { iteration: usize, energy: f64 },
    #[error("bad boundary data: {0}")]
    BadBoundary(String),
    #[error("run has not converged")]
    Unconverged,
    #[error("ball of radius {radius} about z = {z0} leaves the domain")]
    BallOutsideDomain { z0: f64, radius: f64 },
    #[error("annulus of radius {radius} about z = {z} leaves the domain")]
    TooCloseToBoundary { z: f64, radius: f64 },
    #[error("bad solver configuration: {0}")]
    BadConfig(String),
    #[error("field does not match the grid: {0}")]
    FieldMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepRule {
    Fixed { tau: f64 },
    Backtracking { c: f64, shrink: f64 },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Backtracking { c: 1e-4, shrink: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Direction {
    /// Projected steepest descent: `f <- normalize(f - tau g)`.
    Steepest,
    /// Limited-memory quasi-Newton directions, projected to the tangent space.
    Lbfgs { memory: usize },
}

impl Default for Direction {
    fn default() -> Self {
        Direction::Lbfgs { memory: 8 }
    }
}

/// Starting field.
#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    /// The boundary trace extended 0-homogeneously from the domain centre.
    HomogeneousExtension,
    /// `count` axis dipoles (a -Q0 profile below a +Q0 profile) blended into the extension.
    DipoleSeed { count: usize },
    Provided(EquivariantField),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    pub mode: Mode,
    pub step: StepRule,
    pub direction: Direction,
    pub max_iters: usize,
    /// Bound on the mass-normalized tangential gradient, sup over nodes.
    pub grad_tol: f64,
    /// Iterations the bound must hold before stopping.
    pub hold: usize,
    pub seed: u64,
    pub init: Init,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            mode: Mode::Projected,
            step: StepRule::default(),
            direction: Direction::default(),
            max_iters: 20_000,
            grad_tol: 1e-6,
            hold: 10,
            seed: 0,
            init: Init::HomogeneousExtension,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::BadConfig(m.into()));
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be finite and >= 0");
        }
        if !(self.grad_tol > 0.0) {
            return bad("grad_tol must be > 0");
        }
        if let Mode::GlPenalty { epsilon } = self.mode {
            if !(epsilon > 0.0) {
                return bad("epsilon must be > 0");
            }
        }
        match self.step {
            StepRule::Fixed { tau } if !(tau > 0.0) => return bad("tau must be > 0"),
            StepRule::Backtracking { c, shrink } if !(c > 0.0 && c < 1.0 && shrink > 0.0 && shrink < 1.0) => {
                return bad("backtracking needs 0 < c < 1 and 0 < shrink < 1")
            }
            _ => {}
        }
        if let Direction::Lbfgs { memory: 0 } = self.direction {
            return bad("lbfgs memory must be >= 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    MaxIters,
    /// No decrease above round-off is available along the descent direction.
    Stalled,
}

/// A finished minimization.
#[derive(Clone, Debug)]
pub struct SolverRun {
    pub grid: HalfSliceGrid,
    pub trace: BoundaryTrace,
    pub lambda: f64,
    pub mode: Mode,
    pub field: EquivariantField,
    pub energy_history: Vec<f64>,
    pub grad_history: Vec<f64>,
    pub status: RunStatus,
    pub wall_time: f64,
}

impl SolverRun {
    /// Wraps an externally produced field (a sample or a reloaded dump) as a converged run.
    pub fn from_field(grid: HalfSliceGrid, trace: BoundaryTrace, lambda: f64, field: EquivariantField) -> Result<Self, SolverError> {
        if field.len() != grid.len() {
            return Err(SolverError::FieldMismatch(format!("{} values for {} nodes", field.len(), grid.len())));
        }
        let model = EnergyModel::projected(lambda);
        let e = energy::energy_unchecked(&field, &grid, &energy::Stencil::new(&grid), &model);
        Ok(Self {
            grid,
            trace,
            lambda,
            mode: Mode::Projected,
            field,
            energy_history: vec![e],
            grad_history: Vec::new(),
            status: RunStatus::Converged,
            wall_time: 0.0,
        })
    }

    pub fn energy(&self) -> f64 {
        *self.energy_history.last().unwrap_or(&f64::NAN)
    }

    pub fn is_converged(&self) -> bool {
        matches!(self.status, RunStatus::Converged | RunStatus::Stalled)
    }
}
