//! The discrete energy
//!
//! ```text
//! E = sum_radial  pi w_e r_e (dz/dr) |f_{i+1,j} - f_{i,j}|^2
//!   + sum_vertical pi w_e r_i (dr/dz) |f_{i,j+1} - f_{i,j}|^2
//!   + sum_nodes 2 pi w r dr dz [ (|f1|^2 + 4|f2|^2)/(2 r^2) + lambda W(f) + P(f) ]
//! ```
//!
//! with `r_e = (i+1) dr` the radius of a radial edge, `w_e` the mean of its end weights,
//! `W(f) = (|f|^3 - sqrt6 tr Q^3)/(3 sqrt6)` (the reduced potential, extended off the sphere)
//! and `P = (1 - |f|^2)^2 / (4 eps^2)` in penalty mode, zero otherwise.

use super::field::{dot, norm_sqr, EquivariantField};
use super::grid::{HalfSliceGrid, NodeKind, NONE};
use super::SolverError;
use crate::quadrature::pairwise_sum;
use crate::tensor_core::{det3, QTensor, SQRT6};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Hard unit-norm constraint or the norm penalty.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Mode {
    Projected,
    GlPenalty { epsilon: f64 },
}

/// Norm tolerance of the hard mode.
pub const NORM_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyModel {
    pub lambda: f64,
    pub mode: Mode,
}

impl EnergyModel {
    pub fn projected(lambda: f64) -> Self {
        Self { lambda, mode: Mode::Projected }
    }

    fn penalty(&self) -> Option<f64> {
        match self.mode {
            Mode::GlPenalty { epsilon } => Some(1.0 / (4.0 * epsilon * epsilon)),
            Mode::Projected => None,
        }
    }
}

/// Potential extended to all of R^5.
pub fn w_ext(v: &[f64; 5]) -> f64 {
    let n = norm_sqr(v).sqrt();
    let tr3 = 3.0 * det3(&QTensor::new(*v).to_matrix());
    (n * n * n - SQRT6 * tr3) / (3.0 * SQRT6)
}

/// Gradient of [`w_ext`]: `|f| f / sqrt6 - (Q^2 : e_k)`.
pub fn w_ext_grad(v: &[f64; 5]) -> [f64; 5] {
    let n = norm_sqr(v).sqrt();
    let m = QTensor::new(*v).to_matrix();
    let q2 = crate::tensor_core::matmul(&m, &m);
    let p = QTensor::from_matrix(&q2).a;
    std::array::from_fn(|k| n * v[k] / SQRT6 - p[k])
}

/// Precomputed stencil coefficients.
#[derive(Clone, Debug)]
pub struct Stencil {
    /// Coefficient of the edge to the i+1 neighbour (0 if absent).
    pub right: Vec<f64>,
    /// Coefficient of the edge to the j+1 neighbour (0 if absent).
    pub up: Vec<f64>,
    /// `2 pi w r dr dz`.
    pub mass: Vec<f64>,
}

impl Stencil {
    pub fn new(g: &HalfSliceGrid) -> Self {
        let n = g.len();
        let mut right = vec![0.0; n];
        let mut up = vec![0.0; n];
        for k in 0..n {
            let [_, r, _, u] = g.neighbors[k];
            if r != NONE {
                right[k] = edge_coefficient(g, k, r as usize, true);
            }
            if u != NONE {
                up[k] = edge_coefficient(g, k, u as usize, false);
            }
        }
        let mass = (0..n).map(|k| g.mass(k)).collect();
        Self { right, up, mass }
    }
}

/// Smallest cut fraction; keeps the stencil conditioning bounded.
const MIN_CUT: f64 = 0.1;

/// Coefficient of the edge from `a` to its +r (`radial`) or +z neighbour `b`.
///
/// Interior-interior edges carry the mean area weight. An edge from an interior node to a
/// boundary node is cut where it leaves the domain, at fraction `s` of its length; the
/// boundary value is imposed there, which scales the coefficient by `1/s` and moves the
/// edge midpoint to `s/2`. Boundary-boundary edges lie outside the domain and are dropped.
fn edge_coefficient(g: &HalfSliceGrid, a: usize, b: usize, radial: bool) -> f64 {
    let (na, nb) = (&g.nodes[a], &g.nodes[b]);
    let geom = |r_e: f64| if radial { PI * r_e * g.dz / g.dr } else { PI * r_e * g.dr / g.dz };
    match (na.kind, nb.kind) {
        (NodeKind::Interior, NodeKind::Interior) => {
            let re = if radial { (na.i as f64 + 1.0) * g.dr } else { na.r };
            0.5 * (na.weight + nb.weight) * geom(re)
        }
        (NodeKind::Boundary, NodeKind::Boundary) => 0.0,
        _ => {
            let (inn, out) = if na.kind == NodeKind::Interior { (na, nb) } else { (nb, na) };
            let s = g.cut_fraction((inn.r, inn.z), (out.r, out.z)).max(MIN_CUT);
            let re = if radial { inn.r + 0.5 * s * (out.r - inn.r) } else { inn.r };
            geom(re) / s
        }
    }
}

/// Node-term density `(|f1|^2 + 4|f2|^2)/(2 r^2) + lambda W + P`.
pub fn node_density(v: &[f64; 5], r: f64, model: &EnergyModel) -> f64 {
    let phi = (v[1] * v[1] + v[2] * v[2] + 4.0 * (v[3] * v[3] + v[4] * v[4])) / (2.0 * r * r);
    let mut e = phi;
    if model.lambda != 0.0 {
        e += model.lambda * w_ext(v);
    }
    if let Some(c) = model.penalty() {
        let d = 1.0 - norm_sqr(v);
        e += c * d * d;
    }
    e
}

/// Energy owned by each node: its node term plus its +r and +z edges.
pub fn energy_terms(f: &EquivariantField, g: &HalfSliceGrid, st: &Stencil, model: &EnergyModel) -> Vec<f64> {
    (0..g.len())
        .into_par_iter()
        .map(|k| {
            let v = &f.values[k];
            let [_, r, _, u] = g.neighbors[k];
            let mut e = st.mass[k] * node_density(v, g.nodes[k].r, model);
            if r != NONE {
                e += st.right[k] * diff_sqr(v, &f.values[r as usize]);
            }
            if u != NONE {
                e += st.up[k] * diff_sqr(v, &f.values[u as usize]);
            }
            e
        })
        .collect()
}

fn diff_sqr(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    (0..5).map(|c| (a[c] - b[c]).powi(2)).sum()
}

/// Energy without the norm check; summed with a fixed pairwise tree.
pub fn energy_unchecked(f: &EquivariantField, g: &HalfSliceGrid, st: &Stencil, model: &EnergyModel) -> f64 {
    pairwise_sum(&energy_terms(f, g, st, model))
}

/// Energy of a unit-norm field (hard mode).
pub fn discrete_energy(f: &EquivariantField, g: &HalfSliceGrid, lambda: f64) -> Result<f64, SolverError> {
    f.check_unit(NORM_TOL)?;
    Ok(energy_unchecked(f, g, &Stencil::new(g), &EnergyModel::projected(lambda)))
}

/// Euclidean gradient with respect to every node value; zero at boundary nodes.
pub fn ambient_gradient(f: &EquivariantField, g: &HalfSliceGrid, st: &Stencil, model: &EnergyModel) -> Vec<[f64; 5]> {
    (0..g.len())
        .into_par_iter()
        .map(|k| {
            let node = &g.nodes[k];
            if node.kind != NodeKind::Interior {
                return [0.0; 5];
            }
            let v = &f.values[k];
            let [l, r, d, u] = g.neighbors[k];
            let mut out = [0.0; 5];
            let mut edge = |nb: u32, c: f64| {
                if nb != NONE && c != 0.0 {
                    let w = &f.values[nb as usize];
                    for i in 0..5 {
                        out[i] += 2.0 * c * (v[i] - w[i]);
                    }
                }
            };
            edge(r, st.right[k]);
            edge(u, st.up[k]);
            if l != NONE {
                edge(l, st.right[l as usize]);
            }
            if d != NONE {
                edge(d, st.up[d as usize]);
            }
            let m = st.mass[k];
            let inv_r2 = 1.0 / (node.r * node.r);
            out[1] += m * v[1] * inv_r2;
            out[2] += m * v[2] * inv_r2;
            out[3] += m * 4.0 * v[3] * inv_r2;
            out[4] += m * 4.0 * v[4] * inv_r2;
            if model.lambda != 0.0 {
                let gw = w_ext_grad(v);
                for i in 0..5 {
                    out[i] += m * model.lambda * gw[i];
                }
            }
            if let Some(c) = model.penalty() {
                let d = 1.0 - norm_sqr(v);
                for i in 0..5 {
                    out[i] -= m * 4.0 * c * d * v[i];
                }
            }
            out
        })
        .collect()
}

/// Removes the component along `f` at every node.
pub fn project_tangent(f: &EquivariantField, grad: &mut [[f64; 5]]) {
    grad.par_iter_mut().zip(f.values.par_iter()).for_each(|(gk, v)| {
        let a = dot(gk, v) / norm_sqr(v).max(1e-300);
        for i in 0..5 {
            gk[i] -= a * v[i];
        }
    });
}

/// Tangential gradient `g - (g . f) f` of the hard-mode energy.
pub fn discrete_gradient(f: &EquivariantField, g: &HalfSliceGrid, lambda: f64) -> Result<Vec<[f64; 5]>, SolverError> {
    f.check_unit(NORM_TOL)?;
    let mut grad = ambient_gradient(f, g, &Stencil::new(g), &EnergyModel::projected(lambda));
    project_tangent(f, &mut grad);
    Ok(grad)
}
