//! Run configuration: a TOML document with `schema = 1` and the sections `[domain]`,
//! `[grid]`, `[solver]`, `[boundary]` and an optional `[analysis]`. Unknown keys are errors.
//!
//! Lengths are in domain units; `lambda` is dimensionless.

use crate::boundary_data::BoundarySpec;
use crate::solver::{Direction, Domain, Init, Mode, SolverConfig, StepRule};
use crate::topology::AnalysisOptions;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("unsupported schema {0}, expected {SCHEMA}")]
    Schema(u32),
    #[error("invalid value: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_r: usize,
    pub n_z: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    HomogeneousExtension,
    DipoleSeed { count: usize },
    /// A field CSV dump; relative paths resolve against the config file.
    Provided { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub lambda: f64,
    pub mode: Mode,
    pub step: StepRule,
    pub direction: Direction,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub hold: usize,
    pub seed: u64,
    pub init: InitSpec,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            lambda: d.lambda,
            mode: d.mode,
            step: d.step,
            direction: d.direction,
            max_iters: d.max_iters,
            grad_tol: d.grad_tol,
            hold: d.hold,
            seed: d.seed,
            init: InitSpec::HomogeneousExtension,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub domain: Domain,
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub analysis: AnalysisOptions,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse(m) => ConfigError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let InitSpec::Provided { path: p } = &mut cfg.solver.init {
            if p.is_relative() {
                *p = path.parent().unwrap_or(Path::new(".")).join(&*p);
            }
        }
        Ok(cfg)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.schema != SCHEMA {
            return Err(ConfigError::Schema(self.schema));
        }
        self.boundary.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.solver_config(None).validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let InitSpec::DipoleSeed { count: 0 } = self.solver.init {
            return Err(ConfigError::Invalid("dipole_seed count must be >= 1".into()));
        }
        for &t in &self.analysis.levels {
            if !(t > -1.0 && t < 1.0) {
                return Err(ConfigError::Invalid(format!("analysis level {t} outside (-1, 1)")));
            }
        }
        Ok(())
    }

    /// Solver configuration; a provided initial field must be passed in already loaded.
    pub fn solver_config(&self, provided: Option<crate::solver::EquivariantField>) -> SolverConfig {
        let s = &self.solver;
        let init = match (&s.init, provided) {
            (InitSpec::DipoleSeed { count }, _) => Init::DipoleSeed { count: *count },
            (InitSpec::Provided { .. }, Some(f)) => Init::Provided(f),
            _ => Init::HomogeneousExtension,
        };
        SolverConfig {
            lambda: s.lambda,
            mode: s.mode,
            step: s.step,
            direction: s.direction,
            max_iters: s.max_iters,
            grad_tol: s.grad_tol,
            hold: s.hold,
            seed: s.seed,
            init,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema = 1
[domain]
kind = "ball"
radius = 1.0
[grid]
n_r = 16
n_z = 32
[solver]
lambda = 5.0
init = { kind = "dipole_seed", count = 1 }
[boundary]
kind = "director"
profile = "torus"
j = 8
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.solver.lambda, 5.0);
        assert_eq!(c.solver.max_iters, SolverConfig::default().max_iters);
        assert_eq!(RunConfig::parse(&c.to_toml()).unwrap(), c);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), c);
    }

    #[test]
    fn unknown_and_missing_keys_are_errors() {
        let typo = BASE.replace("lambda = 5.0", "lamda = 5.0");
        let e = RunConfig::parse(&typo).unwrap_err().to_string();
        assert!(e.contains("lamda"), "{e}");
        let no_grid = BASE.replace("[grid]\nn_r = 16\nn_z = 32\n", "");
        let e = RunConfig::parse(&no_grid).unwrap_err().to_string();
        assert!(e.contains("grid"), "{e}");
        let bad_schema = BASE.replace("schema = 1", "schema = 2");
        assert!(matches!(RunConfig::parse(&bad_schema), Err(ConfigError::Schema(2))));
        let bad_domain = BASE.replace("radius = 1.0", "radius = 1.0\nheight = 2.0");
        assert!(RunConfig::parse(&bad_domain).is_err());
    }
}
