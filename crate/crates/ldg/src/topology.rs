//! Biaxiality level sets on the half-slice and the torus/split classification.
//!
//! Level sets are traced by marching squares over the active nodes plus a virtual column on
//! the axis, where an equivariant field is `+-e0` and so `beta = sign(f0)`. Chains ending on
//! that column meet the axis; chains ending elsewhere on the border meet the boundary.

use crate::solver::diagnostics::{axis_profile, axis_singularities, AxisSingularity};
use crate::solver::field::EquivariantField;
use crate::solver::grid::HalfSliceGrid;
use crate::solver::SolverRun;
use crate::tensor_core::{biaxiality, join_iota, Sign};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("node {node} has norm {norm}, off the unit sphere")]
    NormViolation { node: usize, norm: f64 },
    #[error("level {t} is outside (-1, 1)")]
    InvalidLevel { t: f64 },
    #[error("level {t} is not a regular value: |grad beta| ratio {ratio:e} on a crossed cell")]
    SingularValue { t: f64, ratio: f64 },
    #[error("level {t} is empty")]
    EmptyLevel { t: f64 },
    #[error("no ring was detected")]
    MissingRing,
    #[error("run has not converged")]
    Unconverged,
}

/// Default level ladder.
pub const LEVELS: [f64; 5] = [-0.9, -0.5, 0.0, 0.5, 0.9];
/// Ring acceptance: argmin of beta within this of -1.
pub const RING_TOL: f64 = 0.05;
/// Rejection threshold of the regular-value screen.
pub const REGULAR_RATIO: f64 = 1e-3;
/// Step of the automatic level nudge.
/// Boundary biaxiality within this of -1 counts as reaching the negative uniaxial phase.
pub const HP1_MARGIN: f64 = 1e-6;
pub const NUDGE: f64 = 0.01;

/// Signed biaxiality at every active node.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaField {
    pub values: Vec<f64>,
    /// Minimum over boundary nodes.
    pub boundary_min: f64,
    /// `(row j, z, sign f0)` on the axis, for rows whose two innermost nodes are active.
    pub axis: Vec<(usize, f64, f64)>,
    /// Extrapolated `f0` on the axis, aligned with `axis`.
    pub axis_f0: Vec<f64>,
}

pub fn beta_field(grid: &HalfSliceGrid, field: &EquivariantField) -> Result<BetaField, TopologyError> {
    if field.len() != grid.len() {
        return Err(TopologyError::NormViolation { node: field.len(), norm: f64::NAN });
    }
    let values = field
        .values
        .par_iter()
        .enumerate()
        .map(|(k, v)| {
            let p = crate::tensor_core::SplitPoint::from_array(*v);
            let n = p.norm();
            if (n - 1.0).abs() > 1e-8 || !n.is_finite() {
                return Err(TopologyError::NormViolation { node: k, norm: n });
            }
            biaxiality(&join_iota(&p)).map_err(|_| TopologyError::NormViolation { node: k, norm: n })
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let boundary_min = grid.boundary().map(|k| values[k]).fold(f64::INFINITY, f64::min);
    let prof = axis_profile(grid, field);
    let rows: Vec<usize> = (0..grid.n_z).filter(|&j| grid.at(0, j).is_some() && grid.at(1, j).is_some()).collect();
    let axis = rows.iter().zip(&prof).map(|(&j, &(z, f0))| (j, z, if f0 >= 0.0 { 1.0 } else { -1.0 })).collect();
    let axis_f0 = prof.iter().map(|p| p.1).collect();
    Ok(BetaField { values, boundary_min, axis, axis_f0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    ClosedInterior,
    AxisToAxis,
    BoundaryArc,
    BoundaryPoint,
}

/// Surface swept by a component under the axial rotation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Revolved {
    Torus,
    TopologicalSphere,
    Strip,
    Circle,
    /// Axis endpoints that match no detected singularity.
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelComponent {
    /// `(r, z)` vertices; closed components repeat no vertex.
    pub polyline: Vec<[f64; 2]>,
    pub kind: ComponentKind,
    pub revolved: Revolved,
    /// Indices into the singularity list of matched axis endpoints.
    pub singularities: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum End {
    Axis,
    Border,
}

/// Sample lattice: column `c = 0` is the axis, column `c = i + 1` holds grid column `i`.
struct Lattice<'a> {
    grid: &'a HalfSliceGrid,
    beta: &'a BetaField,
    cols: usize,
    axis_val: Vec<Option<f64>>,
}

impl<'a> Lattice<'a> {
    fn new(grid: &'a HalfSliceGrid, beta: &'a BetaField) -> Self {
        let mut axis_val = vec![None; grid.n_z];
        for &(j, _, s) in &beta.axis {
            axis_val[j] = Some(s);
        }
        Self { grid, beta, cols: grid.n_r + 1, axis_val }
    }

    fn value(&self, c: usize, j: usize) -> Option<f64> {
        if c == 0 {
            self.axis_val[j]
        } else {
            self.grid.at(c - 1, j).map(|k| self.beta.values[k])
        }
    }

    fn pos(&self, c: usize, j: usize) -> [f64; 2] {
        let r = if c == 0 { 0.0 } else { self.grid.r_of(c - 1) };
        [r, self.grid.z_of(j)]
    }

    /// Edge id: horizontal (c, j)-(c+1, j) is even, vertical (c, j)-(c, j+1) odd.
    fn edge(&self, c: usize, j: usize, vertical: bool) -> usize {
        2 * (j * self.cols + c) + usize::from(vertical)
    }

    fn edge_ends(&self, e: usize) -> ((usize, usize), (usize, usize)) {
        let v = e % 2 == 1;
        let cell = e / 2;
        let (c, j) = (cell % self.cols, cell / self.cols);
        if v {
            ((c, j), (c, j + 1))
        } else {
            ((c, j), (c + 1, j))
        }
    }

    fn crossing(&self, e: usize, t: f64) -> [f64; 2] {
        let (a, b) = self.edge_ends(e);
        let (va, vb) = (self.value(a.0, a.1).unwrap(), self.value(b.0, b.1).unwrap());
        let s = ((t - va) / (vb - va)).clamp(0.0, 1.0);
        let (pa, pb) = (self.pos(a.0, a.1), self.pos(b.0, b.1));
        [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])]
    }

    /// Gradient magnitude of beta at a grid node by (one-sided where needed) differences.
    fn grad_mag(&self, c: usize, j: usize) -> Option<f64> {
        let v = self.value(c, j)?;
        let d = |a: Option<f64>, b: Option<f64>, h: f64| match (a, b) {
            (Some(a), Some(b)) => (b - a) / (2.0 * h),
            (None, Some(b)) => (b - v) / h,
            (Some(a), None) => (v - a) / h,
            _ => 0.0,
        };
        let left = if c > 1 { self.value(c - 1, j) } else { None };
        let right = if c + 1 < self.cols { self.value(c + 1, j) } else { None };
        let down = if j > 0 { self.value(c, j - 1) } else { None };
        let up = if j + 1 < self.grid.n_z { self.value(c, j + 1) } else { None };
        let gr = d(left, right, self.grid.dr);
        let gz = d(down, up, self.grid.dz);
        Some((gr * gr + gz * gz).sqrt())
    }
}

/// Marching-squares components of `{beta = t}`.
pub fn extract_level_set(
    grid: &HalfSliceGrid,
    beta: &BetaField,
    singularities: &[AxisSingularity],
    t: f64,
) -> Result<Vec<LevelComponent>, TopologyError> {
    if !(t > -1.0 && t < 1.0) {
        return Err(TopologyError::InvalidLevel { t });
    }
    let lat = Lattice::new(grid, beta);
    let above = |v: f64| v >= t;
    let mut segments: Vec<[usize; 2]> = Vec::new();
    let mut crossed_cells: Vec<(usize, usize)> = Vec::new();
    for j in 0..grid.n_z.saturating_sub(1) {
        for c in 0..lat.cols - 1 {
            let corners = [(c, j), (c + 1, j), (c + 1, j + 1), (c, j + 1)];
            let vals: Option<Vec<f64>> = corners.iter().map(|&(a, b)| lat.value(a, b)).collect();
            let Some(v) = vals else { continue };
            let bits: Vec<bool> = v.iter().map(|&x| above(x)).collect();
            let edges = [
                lat.edge(c, j, false),
                lat.edge(c + 1, j, true),
                lat.edge(c, j + 1, false),
                lat.edge(c, j, true),
            ];
            let cut = [bits[0] != bits[1], bits[1] != bits[2], bits[3] != bits[2], bits[0] != bits[3]];
            let n = cut.iter().filter(|&&x| x).count();
            if n == 0 {
                continue;
            }
            crossed_cells.push((c, j));
            if n == 2 {
                let idx: Vec<usize> = (0..4).filter(|&e| cut[e]).collect();
                segments.push([edges[idx[0]], edges[idx[1]]]);
            } else {
                // Saddle: the cell mean decides which diagonal pair is joined.
                let centre_above = above(v.iter().sum::<f64>() / 4.0);
                if bits[0] == centre_above {
                    segments.push([edges[0], edges[1]]);
                    segments.push([edges[2], edges[3]]);
                } else {
                    segments.push([edges[0], edges[3]]);
                    segments.push([edges[1], edges[2]]);
                }
            }
        }
    }
    if segments.is_empty() {
        return Err(TopologyError::EmptyLevel { t });
    }
    screen_regular(&lat, &crossed_cells, t)?;
    Ok(chain(&lat, &segments, t, singularities))
}

fn screen_regular(lat: &Lattice, cells: &[(usize, usize)], t: f64) -> Result<(), TopologyError> {
    let mut gmax = 0.0f64;
    for j in 0..lat.grid.n_z {
        for c in 1..lat.cols {
            if let Some(g) = lat.grad_mag(c, j) {
                gmax = gmax.max(g);
            }
        }
    }
    if gmax == 0.0 {
        return Ok(());
    }
    for &(c, j) in cells {
        let gs: Vec<f64> = [(c, j), (c + 1, j), (c + 1, j + 1), (c, j + 1)]
            .iter()
            .filter(|p| p.0 > 0)
            .filter_map(|&(a, b)| lat.grad_mag(a, b))
            .collect();
        if gs.is_empty() {
            continue;
        }
        let g = gs.iter().sum::<f64>() / gs.len() as f64;
        if g < REGULAR_RATIO * gmax {
            return Err(TopologyError::SingularValue { t, ratio: g / gmax });
        }
    }
    Ok(())
}

fn chain(lat: &Lattice, segments: &[[usize; 2]], t: f64, sings: &[AxisSingularity]) -> Vec<LevelComponent> {
    let n_edges = 2 * lat.cols * lat.grid.n_z;
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n_edges];
    for (s, seg) in segments.iter().enumerate() {
        incident[seg[0]].push(s);
        incident[seg[1]].push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let walk = |start_edge: usize, first_seg: usize, used: &mut Vec<bool>| -> Vec<usize> {
        let mut path = vec![start_edge];
        let mut e = start_edge;
        let mut s = first_seg;
        loop {
            used[s] = true;
            let next = if segments[s][0] == e { segments[s][1] } else { segments[s][0] };
            path.push(next);
            match incident[next].iter().find(|&&x| !used[x]) {
                Some(&x) => {
                    e = next;
                    s = x;
                }
                None => break,
            }
        }
        path
    };
    let h = lat.grid.dr.max(lat.grid.dz);
    let end_kind = |e: usize| if e % 2 == 1 && (e / 2).is_multiple_of(lat.cols) { End::Axis } else { End::Border };
    // Open chains start at border edges (a single incident segment).
    for e in 0..n_edges {
        if incident[e].len() == 1 && !used[incident[e][0]] {
            let path = walk(e, incident[e][0], &mut used);
            let ends = [end_kind(path[0]), end_kind(*path.last().unwrap())];
            let pts: Vec<[f64; 2]> = path.iter().map(|&x| lat.crossing(x, t)).collect();
            let mut matched = Vec::new();
            let mut all_matched = true;
            for (k, end) in ends.iter().enumerate() {
                if *end == End::Axis {
                    let z = if k == 0 { pts[0][1] } else { pts[pts.len() - 1][1] };
                    match nearest(sings, z, 2.0 * h) {
                        Some(i) => matched.push(i),
                        None => all_matched = false,
                    }
                }
            }
            let (kind, revolved) = match ends {
                [End::Axis, End::Axis] => {
                    (ComponentKind::AxisToAxis, if all_matched { Revolved::TopologicalSphere } else { Revolved::Indeterminate })
                }
                _ => (ComponentKind::BoundaryArc, Revolved::Strip),
            };
            out.push(LevelComponent { polyline: pts, kind, revolved, singularities: matched });
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            let mut path = walk(segments[s][0], s, &mut used);
            if path.first() == path.last() {
                path.pop();
            }
            let pts = path.iter().map(|&x| lat.crossing(x, t)).collect();
            out.push(LevelComponent { polyline: pts, kind: ComponentKind::ClosedInterior, revolved: Revolved::Torus, singularities: Vec::new() });
        }
    }
    out
}

fn nearest(sings: &[AxisSingularity], z: f64, tol: f64) -> Option<usize> {
    sings
        .iter()
        .enumerate()
        .map(|(i, s)| (i, (s.z - z).abs()))
        .filter(|&(_, d)| d <= tol)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

/// Level extraction with the automatic nudge `t +- 0.01, +- 0.02, ...` on singular values.
pub fn extract_level_nudged(
    grid: &HalfSliceGrid,
    beta: &BetaField,
    sings: &[AxisSingularity],
    t: f64,
) -> (f64, Result<Vec<LevelComponent>, TopologyError>) {
    let mut last = extract_level_set(grid, beta, sings, t);
    if !matches!(last, Err(TopologyError::SingularValue { .. })) {
        return (t, last);
    }
    for k in 1..=5 {
        for dir in [1.0, -1.0] {
            let tt = t + dir * NUDGE * k as f64;
            let r = extract_level_set(grid, beta, sings, tt);
            if !matches!(r, Err(TopologyError::SingularValue { .. })) {
                return (tt, r);
            }
            last = r;
        }
    }
    (t, last)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub r: f64,
    pub z: f64,
    pub beta: f64,
}

/// Interior argmin of beta, if it is within `ring_tol` of -1 and at least 2 dr off the axis.
pub fn detect_ring(grid: &HalfSliceGrid, beta: &BetaField, ring_tol: f64) -> Option<Ring> {
    let (k, b) = argmin_interior(grid, beta)?;
    let n = &grid.nodes[k];
    (b <= -1.0 + ring_tol && n.r >= 2.0 * grid.dr).then_some(Ring { r: n.r, z: n.z, beta: b })
}

fn argmin_interior(grid: &HalfSliceGrid, beta: &BetaField) -> Option<(usize, f64)> {
    grid.interior().map(|k| (k, beta.values[k])).min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Strict local minima of beta below `threshold` other than the global argmin.
pub fn extra_minima(grid: &HalfSliceGrid, beta: &BetaField, threshold: f64) -> Vec<Ring> {
    let best = argmin_interior(grid, beta).map(|p| p.0);
    grid.interior()
        .filter(|&k| Some(k) != best && beta.values[k] < threshold && grid.nodes[k].r >= 2.0 * grid.dr)
        .filter(|&k| {
            grid.neighbors[k].iter().all(|&nb| nb == crate::solver::grid::NONE || beta.values[nb as usize] > beta.values[k])
        })
        .map(|k| Ring { r: grid.nodes[k].r, z: grid.nodes[k].z, beta: beta.values[k] })
        .collect()
}

/// Axisymmetric linking test: an interior ring, beta above `t2` on the boundary, and the
/// axis carrying +-e0 (confident `f0` away from the singularities).
pub fn linking_check(
    grid: &HalfSliceGrid,
    beta: &BetaField,
    ring: Option<&Ring>,
    sings: &[AxisSingularity],
    t2: f64,
) -> Result<bool, TopologyError> {
    let ring = ring.ok_or(TopologyError::MissingRing)?;
    if ring.r < 2.0 * grid.dr || !grid.domain.contains(ring.r, ring.z) {
        return Ok(false);
    }
    if beta.boundary_min <= t2 {
        return Ok(false);
    }
    let h = 2.0 * grid.dr.max(grid.dz);
    let axis_ok = beta.axis.iter().zip(&beta.axis_f0).all(|(&(_, z, _), &f0)| {
        f0.abs() > 0.5 || sings.iter().any(|s| (s.z - z).abs() <= h) || !grid.domain.contains(0.0, z)
    });
    Ok(axis_ok)
}

/// `max (1 - beta)` over interior nodes with `|x| < 1 - rho`: how far the biaxial
/// structure reaches into the ball.
pub fn localization_metric(grid: &HalfSliceGrid, beta: &BetaField, rho: f64) -> f64 {
    grid.interior()
        .filter(|&k| {
            let n = &grid.nodes[k];
            (n.r * n.r + n.z * n.z).sqrt() < 1.0 - rho
        })
        .map(|k| 1.0 - beta.values[k])
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    TorusSolution,
    SplitMinimizer,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hp1 {
    pub holds: bool,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hp3 {
    pub holds: bool,
    pub degree: Option<i32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    /// Requested level.
    pub t: f64,
    /// Level actually traced (after any nudge).
    pub t_used: f64,
    pub components: Vec<LevelComponent>,
    /// Why the level has no components, when it has none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LevelReport {
    pub fn count(&self, r: Revolved) -> usize {
        self.components.iter().filter(|c| c.revolved == r).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub singularities: Vec<AxisSingularity>,
    pub levels: Vec<LevelReport>,
    pub ring: Option<Ring>,
    pub linking: bool,
    pub hp1: Hp1,
    pub hp3: Hp3,
    pub verdict: Verdict,
    /// Further local minima of beta below -0.9 (the ring need not be unique).
    pub extra_minima: Vec<Ring>,
    pub notes: Vec<String>,
}

impl TopologyReport {
    pub fn level(&self, t: f64) -> Option<&LevelReport> {
        self.levels.iter().find(|l| (l.t - t).abs() < 1e-12)
    }
}

/// Knobs of the classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisOptions {
    pub levels: Vec<f64>,
    pub ring_tol: f64,
    /// Upper level of the linking test.
    pub t2: f64,
    /// Level whose closed components certify a torus solution.
    pub torus_level: f64,
    /// Shell width excluded by [`localization_metric`].
    pub localization_rho: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { levels: LEVELS.to_vec(), ring_tol: RING_TOL, t2: 0.5, torus_level: 0.0, localization_rho: 0.2 }
    }
}

/// Full analysis of a converged run with default options.
pub fn classify_solution(run: &SolverRun) -> Result<TopologyReport, TopologyError> {
    classify_run(run, &AnalysisOptions::default())
}

pub fn classify_run(run: &SolverRun, opts: &AnalysisOptions) -> Result<TopologyReport, TopologyError> {
    if !run.is_converged() {
        return Err(TopologyError::Unconverged);
    }
    classify_field(&run.grid, &run.field, run.trace.degree, opts)
}

/// Analysis of a field with the boundary generator's director degree.
pub fn classify_field(
    grid: &HalfSliceGrid,
    field: &EquivariantField,
    degree: Option<i32>,
    opts: &AnalysisOptions,
) -> Result<TopologyReport, TopologyError> {
    let beta = beta_field(grid, field)?;
    let sings = axis_singularities(grid, field);
    let hp1 = Hp1 { holds: beta.boundary_min > -1.0 + HP1_MARGIN, value: beta.boundary_min };
    let hp3 = Hp3 { holds: degree.is_some_and(|d| d % 2 != 0), degree };
    let ring = detect_ring(grid, &beta, opts.ring_tol);
    let levels: Vec<LevelReport> = opts
        .levels
        .par_iter()
        .map(|&t| {
            let (t_used, r) = extract_level_nudged(grid, &beta, &sings, t);
            match r {
                Ok(components) => LevelReport { t, t_used, components, note: None },
                Err(e) => LevelReport { t, t_used, components: Vec::new(), note: Some(e.to_string()) },
            }
        })
        .collect();
    let linking = match ring {
        Some(ref r) => linking_check(grid, &beta, Some(r), &sings, opts.t2)?,
        None => false,
    };
    let mut notes = Vec::new();
    if !hp1.holds {
        notes.push(format!("HP1 fails: boundary beta reaches {:.6}", hp1.value));
    }
    if !hp3.holds {
        notes.push(match degree {
            Some(d) => format!("HP3 fails: director degree {d} is even"),
            None => "HP3 undetermined: boundary director not defined everywhere".into(),
        });
    }
    let ambiguous = levels.iter().any(|l| l.count(Revolved::Indeterminate) > 0);
    if ambiguous {
        notes.push("axis endpoints of a level set match no detected singularity".into());
    }
    let alternating = sings.windows(2).all(|w| w[0].sign != w[1].sign);
    let zero_tori = levels.iter().find(|l| l.t == opts.torus_level).map_or(0, |l| l.count(Revolved::Torus));
    let verdict = if !hp1.holds || !hp3.holds || ambiguous {
        Verdict::Indeterminate
    } else if sings.is_empty() && ring.is_some() && linking && zero_tori > 0 {
        Verdict::TorusSolution
    } else if !sings.is_empty() && sings.len().is_multiple_of(2) && alternating {
        Verdict::SplitMinimizer
    } else {
        if sings.len() % 2 == 1 {
            notes.push(format!("odd number of singularities ({})", sings.len()));
        }
        if sings.is_empty() && ring.is_none() {
            notes.push("no singularities and no ring".into());
        }
        Verdict::Indeterminate
    };
    Ok(TopologyReport {
        singularities: sings,
        levels,
        ring,
        linking,
        hp1,
        hp3,
        verdict,
        extra_minima: extra_minima(grid, &beta, -0.9),
        notes,
    })
}

/// Sign convention check used by reports: `+` is -e0 below, e0 above.
pub fn sign_symbol(s: Sign) -> &'static str {
    match s {
        Sign::Plus => "+",
        Sign::Minus => "-",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_core::SplitPoint;
    use crate::variation::TangentMap;

    fn q0(grid: &HalfSliceGrid, alpha: f64) -> EquivariantField {
        let tm = TangentMap::new(alpha, Sign::Plus);
        EquivariantField::from_fn(grid, |r, z| {
            let d = (r * r + z * z).sqrt();
            tm.split_at([r / d, 0.0, z / d])
        })
    }

    #[test]
    fn beta_of_equator_map_follows_the_cone_law() {
        let g = HalfSliceGrid::ball(1.0, 24, 48).unwrap();
        let b = beta_field(&g, &q0(&g, 0.0)).unwrap();
        for (k, n) in g.nodes.iter().enumerate() {
            let c = n.z / (n.r * n.r + n.z * n.z).sqrt();
            assert!((b.values[k] - (-0.5 * c * c * c + 1.5 * c)).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_is_rotation_invariant() {
        let g = HalfSliceGrid::ball(1.0, 24, 48).unwrap();
        let a = beta_field(&g, &q0(&g, 0.0)).unwrap();
        let b = beta_field(&g, &q0(&g, 0.0).rotated(2.3)).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn equator_map_zero_level_is_one_axis_to_boundary_piece() {
        let g = HalfSliceGrid::ball(1.0, 32, 64).unwrap();
        let f = q0(&g, 0.0);
        let b = beta_field(&g, &f).unwrap();
        let sings = axis_singularities(&g, &f);
        assert_eq!(sings.len(), 1);
        let comps = extract_level_set(&g, &b, &sings, 0.0).unwrap();
        assert_eq!(comps.len(), 1, "{comps:?}");
        let c = &comps[0];
        assert!(c.polyline.iter().all(|p| p[1].abs() < 0.5 * g.dz + 1e-12));
        assert!(c.polyline.iter().any(|p| p[0] < g.dr));
        assert!(c.polyline.iter().any(|p| p[0] > 0.95));
    }

    #[test]
    fn constant_field_is_indeterminate_with_hp1() {
        let g = HalfSliceGrid::ball(1.0, 16, 32).unwrap();
        let f = EquivariantField::constant(&g, SplitPoint::from_array([1.0, 0.0, 0.0, 0.0, 0.0]));
        let rep = classify_field(&g, &f, Some(0), &AnalysisOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Indeterminate);
        assert!(rep.hp1.holds);
        assert!(rep.ring.is_none() && rep.singularities.is_empty());
        assert!(rep.levels.iter().all(|l| l.components.is_empty()));
    }

    #[test]
    fn invalid_levels_are_rejected() {
        let g = HalfSliceGrid::ball(1.0, 8, 16).unwrap();
        let b = beta_field(&g, &q0(&g, 0.0)).unwrap();
        for t in [-1.0, 1.0, 1.5] {
            assert!(matches!(extract_level_set(&g, &b, &[], t), Err(TopologyError::InvalidLevel { .. })));
        }
    }

    #[test]
    fn ring_needs_distance_from_the_axis() {
        let g = HalfSliceGrid::ball(1.0, 16, 32).unwrap();
        // Negative uniaxial near the axis only: no ring.
        let f = EquivariantField::from_fn(&g, |r, _| {
            let s = if r < g.dr { -1.0 } else { 1.0 };
            SplitPoint::from_array([s, 0.0, 0.0, 0.0, 0.0])
        });
        let b = beta_field(&g, &f).unwrap();
        assert!(detect_ring(&g, &b, 0.05).is_none());
    }
}
