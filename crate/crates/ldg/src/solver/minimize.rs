//! Descent on the product of unit spheres (or R^5 in penalty mode) with a mass-weighted
//! metric `<u, v> = sum_k m_k u_k . v_k`, `m_k = 2 pi w r dr dz`.
//!
//! Directions are steepest descent or L-BFGS built from ambient differences and projected
//! back to the tangent space; the retraction is node-wise normalization. Step lengths come
//! from Armijo backtracking or a fixed `tau`.

use super::energy::{ambient_gradient, energy_unchecked, project_tangent, EnergyModel, Mode, Stencil};
use super::field::{normalize, EquivariantField};
use super::grid::{HalfSliceGrid, NodeKind};
use super::{Direction, Init, RunStatus, SolverConfig, SolverError, SolverRun, StepRule};
use crate::boundary_data::BoundaryTrace;
use crate::quadrature::pairwise_sum;
use crate::tensor_core::SplitPoint;
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::VecDeque;
use std::time::Instant;

/// Accepted steps may raise the energy by this much (round-off).
pub const ENERGY_SLACK: f64 = 1e-12;
const MAX_SHRINKS: usize = 60;

type Vec5 = Vec<[f64; 5]>;

/// Runs the configured descent from the configured initial field.
pub fn minimize(cfg: &SolverConfig, grid: &HalfSliceGrid, trace: &BoundaryTrace) -> Result<SolverRun, SolverError> {
    cfg.validate()?;
    check_trace(grid, trace)?;
    let start = Instant::now();
    let mut f = initial_field(cfg, grid, trace)?;
    f.set_boundary(grid, &trace.values);
    let projected = cfg.mode == Mode::Projected;
    if projected {
        f.normalize();
    }
    let s = State::new(grid, EnergyModel { lambda: cfg.lambda, mode: cfg.mode }, projected);
    let mut e = s.energy(&f);
    let mut g = s.gradient(&f);
    let mut energy_history = vec![e];
    let mut grad_history = vec![sup_norm(&g)];
    let mut mem: VecDeque<(Vec5, Vec5, f64)> = VecDeque::new();
    let h = grid.dr.min(grid.dz);
    let mut tau_sd = 0.1 * h * h;
    let mut held = 0usize;
    let mut status = RunStatus::MaxIters;

    for iteration in 1..=cfg.max_iters {
        if *grad_history.last().unwrap() <= cfg.grad_tol {
            held += 1;
            if held >= cfg.hold {
                status = RunStatus::Converged;
                break;
            }
        } else {
            held = 0;
        }
        let mut quasi_newton = matches!(cfg.direction, Direction::Lbfgs { .. }) && !mem.is_empty();
        let (f_new, e_new) = loop {
            let mut d = if quasi_newton { s.two_loop(&g, &mem) } else { g.iter().map(|v| v.map(|x| -x)).collect() };
            if projected {
                project_tangent(&f, &mut d);
            }
            let mut slope = s.inner(&d, &g);
            if !(slope < 0.0) {
                d = g.iter().map(|v| v.map(|x| -x)).collect();
                slope = s.inner(&d, &g);
                quasi_newton = false;
                mem.clear();
            }
            match cfg.step {
                StepRule::Fixed { tau } => {
                    let trial = s.retract(&f, &d, tau);
                    let et = s.energy(&trial);
                    break (trial, et);
                }
                StepRule::Backtracking { c, shrink } => {
                    let mut tau = if quasi_newton { 1.0 } else { tau_sd };
                    let mut last = f64::NAN;
                    let mut accepted = None;
                    for _ in 0..MAX_SHRINKS {
                        let trial = s.retract(&f, &d, tau);
                        let et = s.energy(&trial);
                        if et <= e + c * tau * slope + ENERGY_SLACK {
                            accepted = Some((trial, et));
                            break;
                        }
                        last = et;
                        tau *= shrink;
                    }
                    if let Some(a) = accepted {
                        if !quasi_newton {
                            tau_sd = (2.0 * tau).min(1e6 * h * h);
                        }
                        break a;
                    }
                    if quasi_newton {
                        quasi_newton = false;
                        mem.clear();
                        continue;
                    }
                    if last > e + ENERGY_SLACK {
                        return Err(SolverError::Diverged { iteration, energy: last });
                    }
                    status = RunStatus::Stalled;
                    break (f.clone(), e);
                }
            }
        };
        if status == RunStatus::Stalled {
            break;
        }
        let g_new = s.gradient(&f_new);
        if let Direction::Lbfgs { memory } = cfg.direction {
            let sv = diff(&f_new.values, &f.values);
            let yv = diff(&g_new, &g);
            let sy = s.inner(&sv, &yv);
            let scale = (s.inner(&sv, &sv) * s.inner(&yv, &yv)).sqrt();
            if sy > 1e-12 * scale {
                if mem.len() == memory {
                    mem.pop_front();
                }
                mem.push_back((sv, yv, 1.0 / sy));
            }
        }
        f = f_new;
        e = e_new;
        g = g_new;
        energy_history.push(e);
        grad_history.push(sup_norm(&g));
    }
    if status == RunStatus::MaxIters && held + 1 >= cfg.hold && *grad_history.last().unwrap() <= cfg.grad_tol {
        status = RunStatus::Converged;
    }
    Ok(SolverRun {
        grid: grid.clone(),
        trace: trace.clone(),
        lambda: cfg.lambda,
        mode: cfg.mode,
        field: f,
        energy_history,
        grad_history,
        status,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn check_trace(grid: &HalfSliceGrid, trace: &BoundaryTrace) -> Result<(), SolverError> {
    let nodes: Vec<usize> = grid.boundary().collect();
    if nodes.len() != trace.values.len() || nodes.iter().zip(&trace.values).any(|(a, (b, _))| a != b) {
        return Err(SolverError::BadBoundary("trace was sampled on a different grid".into()));
    }
    for p in [trace.north, trace.south] {
        if p.zeta1.norm() > 1e-10 || p.zeta2.norm() > 1e-10 || (p.t.abs() - 1.0).abs() > 1e-10 {
            return Err(SolverError::BadBoundary(format!("axis endpoint value {:?} is not +-e0", p.to_array())));
        }
    }
    for (k, p) in &trace.values {
        if (p.norm() - 1.0).abs() > 1e-10 {
            return Err(SolverError::BadBoundary(format!("node {k} has norm {}", p.norm())));
        }
    }
    Ok(())
}

struct State<'a> {
    grid: &'a HalfSliceGrid,
    st: Stencil,
    model: EnergyModel,
    projected: bool,
    /// Mass of interior nodes, 0 on boundary nodes.
    mass: Vec<f64>,
}

impl<'a> State<'a> {
    fn new(grid: &'a HalfSliceGrid, model: EnergyModel, projected: bool) -> Self {
        let st = Stencil::new(grid);
        let mass = (0..grid.len())
            .map(|k| if grid.nodes[k].kind == NodeKind::Interior { st.mass[k] } else { 0.0 })
            .collect();
        Self { grid, st, model, projected, mass }
    }

    fn energy(&self, f: &EquivariantField) -> f64 {
        energy_unchecked(f, self.grid, &self.st, &self.model)
    }

    /// Gradient in the mass metric, tangential in projected mode.
    fn gradient(&self, f: &EquivariantField) -> Vec5 {
        let mut g = ambient_gradient(f, self.grid, &self.st, &self.model);
        if self.projected {
            project_tangent(f, &mut g);
        }
        g.par_iter_mut().zip(self.mass.par_iter()).for_each(|(v, &m)| {
            if m > 0.0 {
                v.iter_mut().for_each(|x| *x /= m);
            } else {
                *v = [0.0; 5];
            }
        });
        g
    }

    fn inner(&self, a: &[[f64; 5]], b: &[[f64; 5]]) -> f64 {
        let terms: Vec<f64> = a
            .par_iter()
            .zip(b.par_iter())
            .zip(self.mass.par_iter())
            .map(|((u, v), m)| m * (0..5).map(|i| u[i] * v[i]).sum::<f64>())
            .collect();
        pairwise_sum(&terms)
    }

    fn retract(&self, f: &EquivariantField, d: &[[f64; 5]], tau: f64) -> EquivariantField {
        let values = f
            .values
            .par_iter()
            .zip(d.par_iter())
            .zip(self.mass.par_iter())
            .map(|((v, dv), &m)| {
                if m == 0.0 {
                    return *v;
                }
                let mut w: [f64; 5] = std::array::from_fn(|i| v[i] + tau * dv[i]);
                if self.projected {
                    normalize(&mut w);
                }
                w
            })
            .collect();
        EquivariantField { values }
    }

    /// `-H g` by the two-loop recursion in the mass metric.
    fn two_loop(&self, g: &[[f64; 5]], mem: &VecDeque<(Vec5, Vec5, f64)>) -> Vec5 {
        let mut q: Vec5 = g.to_vec();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * self.inner(s, &q);
            axpy(&mut q, -a, y);
            alphas.push(a);
        }
        let (s, y, _) = mem.back().unwrap();
        let gamma = self.inner(s, y) / self.inner(y, y);
        q.iter_mut().for_each(|v| v.iter_mut().for_each(|x| *x *= gamma));
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * self.inner(y, &q);
            axpy(&mut q, a - b, s);
        }
        q.iter_mut().for_each(|v| v.iter_mut().for_each(|x| *x = -*x));
        q
    }
}

fn axpy(y: &mut [[f64; 5]], a: f64, x: &[[f64; 5]]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(u, v)| {
        for i in 0..5 {
            u[i] += a * v[i];
        }
    });
}

fn diff(a: &[[f64; 5]], b: &[[f64; 5]]) -> Vec5 {
    a.iter().zip(b).map(|(u, v)| std::array::from_fn(|i| u[i] - v[i])).collect()
}

fn sup_norm(g: &[[f64; 5]]) -> f64 {
    g.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max)
}

/// The configured starting field (boundary values not yet imposed).
pub fn initial_field(cfg: &SolverConfig, grid: &HalfSliceGrid, trace: &BoundaryTrace) -> Result<EquivariantField, SolverError> {
    match &cfg.init {
        Init::HomogeneousExtension => Ok(homogeneous_extension(grid, trace)),
        Init::DipoleSeed { count } => Ok(dipole_seed(grid, trace, *count, cfg.seed)),
        Init::Provided(f) => {
            if f.len() != grid.len() {
                return Err(SolverError::FieldMismatch(format!("{} values for {} nodes", f.len(), grid.len())));
            }
            Ok(f.clone())
        }
    }
}

pub fn homogeneous_extension(grid: &HalfSliceGrid, trace: &BoundaryTrace) -> EquivariantField {
    EquivariantField::from_fn(grid, |r, z| trace.extend(r, z))
}

/// Axis points `(z_a, z_b)`, `z_a < z_b`, of `count` seeded dipoles.
pub fn dipole_positions(grid: &HalfSliceGrid, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let (lo, hi) = grid.axis_segment();
    let len = hi - lo;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|m| {
            let slot = len / count as f64;
            let base = lo + m as f64 * slot;
            let ja: f64 = rng.random_range(-0.05..0.05);
            let jb: f64 = rng.random_range(-0.05..0.05);
            (base + (0.25 + ja) * slot, base + (0.75 + jb) * slot)
        })
        .collect()
}

/// Dipole profiles in the L0 + L1 circle, `psi = sum (theta_b - theta_a)`, blended into the
/// homogeneous extension near the boundary.
pub fn dipole_seed(grid: &HalfSliceGrid, trace: &BoundaryTrace, count: usize, seed: u64) -> EquivariantField {
    let dipoles = dipole_positions(grid, count, seed);
    let (r_max, z_lo, z_hi) = grid.domain.bounds();
    let (zc, hz) = (0.5 * (z_lo + z_hi), 0.5 * (z_hi - z_lo));
    EquivariantField::from_fn(grid, |r, z| {
        let psi: f64 = dipoles.iter().map(|&(za, zb)| r.atan2(z - zb) - r.atan2(z - za)).sum();
        let seed_val = SplitPoint::new(psi.cos(), C::new(psi.sin(), 0.0), C::new(0.0, 0.0));
        let ext = trace.extend(r, z);
        let rho = ((r / r_max).powi(2) + ((z - zc) / hz).powi(2)).sqrt();
        let t = ((rho - 0.7) / 0.3).clamp(0.0, 1.0);
        let s = t * t * (3.0 - 2.0 * t);
        let mix = seed_val.scale(1.0 - s) + ext.scale(s);
        if mix.norm() > 1e-8 {
            mix.normalized()
        } else {
            ext
        }
    })
}
