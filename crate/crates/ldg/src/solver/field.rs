//! Discrete equivariant fields: five reals `(f0, f1, f2)` per active node.

use super::grid::{HalfSliceGrid, NodeKind};
use super::SolverError;
use crate::tensor_core::SplitPoint;

/// Values `(f0, re f1, im f1, re f2, im f2)` at the active nodes of a grid, in grid order.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivariantField {
    pub values: Vec<[f64; 5]>,
}

impl EquivariantField {
    pub fn from_fn(grid: &HalfSliceGrid, f: impl Fn(f64, f64) -> SplitPoint) -> Self {
        Self { values: grid.nodes.iter().map(|n| f(n.r, n.z).to_array()).collect() }
    }

    pub fn constant(grid: &HalfSliceGrid, p: SplitPoint) -> Self {
        Self { values: vec![p.to_array(); grid.len()] }
    }

    pub fn point(&self, k: usize) -> SplitPoint {
        SplitPoint::from_array(self.values[k])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `max_k |1 - |f_k|^2|`.
    pub fn max_norm_defect(&self) -> f64 {
        self.values.iter().map(|v| (1.0 - norm_sqr(v)).abs()).fold(0.0, f64::max)
    }

    /// Errors when some node is off the unit sphere by more than `tol`.
    pub fn check_unit(&self, tol: f64) -> Result<(), SolverError> {
        for (k, v) in self.values.iter().enumerate() {
            let n = norm_sqr(v).sqrt();
            if (n - 1.0).abs() > tol || !n.is_finite() {
                return Err(SolverError::NormViolation { node: k, norm: n });
            }
        }
        Ok(())
    }

    /// Projects every node back onto the unit sphere.
    pub fn normalize(&mut self) {
        for v in self.values.iter_mut() {
            normalize(v);
        }
    }

    /// Overwrites boundary nodes with `values` (one per boundary node, in grid order).
    pub fn set_boundary(&mut self, grid: &HalfSliceGrid, values: &[(usize, SplitPoint)]) {
        for &(k, p) in values {
            debug_assert_eq!(grid.nodes[k].kind, NodeKind::Boundary);
            self.values[k] = p.to_array();
        }
    }

    /// Applies `alpha`-rotation (degree-(0,1,2) action) to every node.
    pub fn rotated(&self, alpha: f64) -> Self {
        Self { values: self.values.iter().map(|v| SplitPoint::from_array(*v).rotate(alpha).to_array()).collect() }
    }
}

pub(crate) fn norm_sqr(v: &[f64; 5]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub(crate) fn normalize(v: &mut [f64; 5]) {
    let n = norm_sqr(v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

pub(crate) fn dot(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
