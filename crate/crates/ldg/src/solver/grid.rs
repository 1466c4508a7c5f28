//! Half-slice grids: the meridian half-plane {r > 0} of an axisymmetric domain, cell
//! centred with `r_i = (i + 1/2) dr` so no node sits on the axis.

use super::SolverError;
use serde::{Deserialize, Serialize};

/// Axisymmetric domain, described by its meridian half-slice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Ball { radius: f64 },
    /// Radius R, height H, centred at the origin.
    Cylinder { radius: f64, height: f64 },
    /// Explicit cell mask on [0, r_max] x [z_min, z_max]; row-major with z outer.
    Mask { r_max: f64, z_min: f64, z_max: f64, n_r: usize, n_z: usize, inside: Vec<bool> },
}

impl Domain {
    /// Bounding box `(r_max, z_min, z_max)` of the half-slice.
    pub fn bounds(&self) -> (f64, f64, f64) {
        match *self {
            Domain::Ball { radius } => (radius, -radius, radius),
            Domain::Cylinder { radius, height } => (radius, -0.5 * height, 0.5 * height),
            Domain::Mask { r_max, z_min, z_max, .. } => (r_max, z_min, z_max),
        }
    }

    pub fn contains(&self, r: f64, z: f64) -> bool {
        match *self {
            Domain::Ball { radius } => r * r + z * z < radius * radius,
            Domain::Cylinder { radius, height } => r < radius && z.abs() < 0.5 * height,
            Domain::Mask { r_max, z_min, z_max, n_r, n_z, ref inside } => {
                if r < 0.0 || r >= r_max || z < z_min || z >= z_max {
                    return false;
                }
                let i = ((r / r_max) * n_r as f64) as usize;
                let j = (((z - z_min) / (z_max - z_min)) * n_z as f64) as usize;
                inside[j.min(n_z - 1) * n_r + i.min(n_r - 1)]
            }
        }
    }

    /// Signed distance (negative inside) where cheaply known.
    fn sdf(&self, r: f64, z: f64) -> Option<f64> {
        match *self {
            Domain::Ball { radius } => Some((r * r + z * z).sqrt() - radius),
            Domain::Cylinder { radius, height } => {
                let dx = r - radius;
                let dz = z.abs() - 0.5 * height;
                let out = (dx.max(0.0).powi(2) + dz.max(0.0).powi(2)).sqrt();
                Some(out + dx.max(dz).min(0.0))
            }
            Domain::Mask { .. } => None,
        }
    }

    fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::BadDomain(m.to_string()));
        match *self {
            Domain::Ball { radius } if !(radius > 0.0) => bad("ball radius must be positive"),
            Domain::Cylinder { radius, height } if !(radius > 0.0 && height > 0.0) => {
                bad("cylinder radius and height must be positive")
            }
            Domain::Mask { r_max, z_min, z_max, n_r, n_z, ref inside } => {
                if !(r_max > 0.0 && z_max > z_min) || n_r == 0 || n_z == 0 {
                    return bad("mask bounds must be nonempty");
                }
                if inside.len() != n_r * n_z {
                    return bad("mask length must be n_r * n_z");
                }
                for j in 0..n_z {
                    let row = &inside[j * n_r..(j + 1) * n_r];
                    let runs = row.windows(2).filter(|w| w[0] != w[1]).count() + usize::from(row[0]);
                    if runs > 2 || (runs == 2 && !row[0]) {
                        return bad("mask rows must be a single contiguous run");
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// Unknown: cell centre inside the domain.
    Interior,
    /// Fixed Dirichlet value: centre outside, next to an interior node.
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub i: usize,
    pub j: usize,
    pub r: f64,
    pub z: f64,
    pub kind: NodeKind,
    /// Area fraction of the cell inside the domain.
    pub weight: f64,
}

pub const NONE: u32 = u32::MAX;

/// Cell-centred half-slice grid with the active nodes of a domain.
#[derive(Clone, Debug)]
pub struct HalfSliceGrid {
    pub domain: Domain,
    pub n_r: usize,
    pub n_z: usize,
    pub dr: f64,
    pub dz: f64,
    pub z_min: f64,
    /// Active nodes (interior and boundary) in z-outer row-major order.
    pub nodes: Vec<Node>,
    /// Padded dimensions: one cell beyond the domain's box in +r and both z directions.
    /// `index[j * n_r + i]` is the active index or [`NONE`].
    pub index: Vec<u32>,
    /// Per active node: neighbours (i-1, i+1, j-1, j+1), [`NONE`] when inactive.
    pub neighbors: Vec<[u32; 4]>,
}

impl HalfSliceGrid {
    pub fn new(domain: Domain, n_r: usize, n_z: usize) -> Result<Self, SolverError> {
        domain.validate()?;
        if n_r < 4 || n_z < 4 {
            return Err(SolverError::BadDomain(format!("grid {n_r} x {n_z} is too small")));
        }
        if let Domain::Mask { n_r: mr, n_z: mz, .. } = domain {
            if (mr, mz) != (n_r, n_z) {
                return Err(SolverError::BadDomain(format!(
                    "mask is {mr} x {mz} but the grid is {n_r} x {n_z}"
                )));
            }
        }
        let (r_max, z_min, z_max) = domain.bounds();
        let dr = r_max / n_r as f64;
        let dz = (z_max - z_min) / n_z as f64;
        // `n_r x n_z` cells tile the bounding box; pad one layer outward for boundary nodes.
        let (n_r, n_z, z_min) = (n_r + 1, n_z + 2, z_min - dz);
        let center = |i: usize, j: usize| ((i as f64 + 0.5) * dr, z_min + (j as f64 + 0.5) * dz);
        let inside: Vec<bool> = (0..n_r * n_z)
            .map(|k| {
                let (r, z) = center(k % n_r, k / n_r);
                domain.contains(r, z)
            })
            .collect();
        let is_in = |i: isize, j: isize| -> bool {
            i >= 0 && j >= 0 && (i as usize) < n_r && (j as usize) < n_z && inside[j as usize * n_r + i as usize]
        };
        let mut nodes = Vec::new();
        let mut index = vec![NONE; n_r * n_z];
        for j in 0..n_z {
            for i in 0..n_r {
                let (ii, jj) = (i as isize, j as isize);
                let kind = if inside[j * n_r + i] {
                    NodeKind::Interior
                } else if is_in(ii - 1, jj) || is_in(ii + 1, jj) || is_in(ii, jj - 1) || is_in(ii, jj + 1) {
                    NodeKind::Boundary
                } else {
                    continue;
                };
                let (r, z) = center(i, j);
                index[j * n_r + i] = nodes.len() as u32;
                nodes.push(Node { i, j, r, z, kind, weight: cell_fraction(&domain, r, z, dr, dz) });
            }
        }
        // Interior nodes on the bounding-box edge would need neighbours outside the box.
        for n in &nodes {
            if n.kind == NodeKind::Interior && (n.i + 1 == n_r || n.j == 0 || n.j + 1 == n_z) {
                return Err(SolverError::BadDomain(
                    "domain extends past its bounding box".into(),
                ));
            }
        }
        let neighbors = nodes
            .iter()
            .map(|n| {
                let at = |i: isize, j: isize| {
                    if i < 0 || j < 0 || i as usize >= n_r || j as usize >= n_z {
                        NONE
                    } else {
                        index[j as usize * n_r + i as usize]
                    }
                };
                let (i, j) = (n.i as isize, n.j as isize);
                [at(i - 1, j), at(i + 1, j), at(i, j - 1), at(i, j + 1)]
            })
            .collect();
        Ok(Self { domain, n_r, n_z, dr, dz, z_min, nodes, index, neighbors })
    }

    pub fn ball(radius: f64, n_r: usize, n_z: usize) -> Result<Self, SolverError> {
        Self::new(Domain::Ball { radius }, n_r, n_z)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn at(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n_r || j >= self.n_z {
            return None;
        }
        let k = self.index[j * self.n_r + i];
        (k != NONE).then_some(k as usize)
    }

    pub fn r_of(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr
    }

    pub fn z_of(&self, j: usize) -> f64 {
        self.z_min + (j as f64 + 0.5) * self.dz
    }

    /// `2 pi w r dr dz`: the volume a node represents.
    pub fn mass(&self, k: usize) -> f64 {
        let n = &self.nodes[k];
        2.0 * std::f64::consts::PI * n.weight * n.r * self.dr * self.dz
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&k| self.nodes[k].kind == NodeKind::Interior)
    }

    pub fn boundary(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&k| self.nodes[k].kind == NodeKind::Boundary)
    }

    /// Fraction of the segment from `inside` to `outside` before it leaves the domain.
    pub fn cut_fraction(&self, inside: (f64, f64), outside: (f64, f64)) -> f64 {
        if matches!(self.domain, Domain::Mask { .. }) {
            return 0.5;
        }
        let at = |t: f64| (inside.0 + t * (outside.0 - inside.0), inside.1 + t * (outside.1 - inside.1));
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            let (r, z) = at(mid);
            if self.domain.contains(r, z) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// z-extent `(bottom, top)` of the axis segment inside the domain.
    pub fn axis_segment(&self) -> (f64, f64) {
        let col: Vec<usize> = (0..self.n_z).filter(|&j| self.domain.contains(0.0, self.z_of(j))).collect();
        match (col.first(), col.last()) {
            (Some(&a), Some(&b)) => (self.z_of(a) - 0.5 * self.dz, self.z_of(b) + 0.5 * self.dz),
            _ => (0.0, 0.0),
        }
    }
}

/// Area fraction of the cell centred at (r, z) inside the domain; subsampled only for cut cells.
fn cell_fraction(d: &Domain, r: f64, z: f64, dr: f64, dz: f64) -> f64 {
    let corners = [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5), (0.0, 0.0)];
    let states: Vec<bool> = corners.iter().map(|(a, b)| d.contains(r + a * dr, z + b * dz)).collect();
    let uniform = states.iter().all(|&s| s == states[0]);
    let half_diag = 0.5 * (dr * dr + dz * dz).sqrt();
    let near = d.sdf(r, z).is_some_and(|s| s.abs() < half_diag);
    if uniform && !near {
        return if states[0] { 1.0 } else { 0.0 };
    }
    if matches!(d, Domain::Mask { .. }) {
        return if states[4] { 1.0 } else { 0.0 };
    }
    const SUB: usize = 24;
    let mut hits = 0usize;
    for a in 0..SUB {
        for b in 0..SUB {
            let rr = r + ((a as f64 + 0.5) / SUB as f64 - 0.5) * dr;
            let zz = z + ((b as f64 + 0.5) / SUB as f64 - 0.5) * dz;
            if d.contains(rr, zz) {
                hits += 1;
            }
        }
    }
    hits as f64 / (SUB * SUB) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volume_from_weights() {
        let g = HalfSliceGrid::ball(1.0, 64, 128).unwrap();
        let vol: f64 = (0..g.len()).map(|k| g.mass(k)).sum();
        let exact = 4.0 / 3.0 * std::f64::consts::PI;
        assert!((vol - exact).abs() / exact < 1e-3, "{vol}");
        assert!(g.nodes.iter().all(|n| n.r > 0.0));
        assert!(g.boundary().count() > 0);
    }

    #[test]
    fn cylinder_and_mask() {
        let g = HalfSliceGrid::new(Domain::Cylinder { radius: 1.0, height: 2.0 }, 16, 32).unwrap();
        assert_eq!(g.interior().count(), 16 * 32);
        let vol: f64 = (0..g.len()).map(|k| g.mass(k)).sum();
        assert!((vol - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        let mut inside = vec![false; 16 * 32];
        for j in 4..28 {
            for i in 0..10 {
                inside[j * 16 + i] = true;
            }
        }
        let m = Domain::Mask { r_max: 1.0, z_min: -1.0, z_max: 1.0, n_r: 16, n_z: 32, inside };
        let g = HalfSliceGrid::new(m, 16, 32).unwrap();
        assert_eq!(g.interior().count(), 24 * 10);
        let mut bad = vec![false; 16 * 32];
        bad[5 * 16 + 1] = true;
        bad[5 * 16 + 3] = true;
        let m = Domain::Mask { r_max: 1.0, z_min: -1.0, z_max: 1.0, n_r: 16, n_z: 32, inside: bad };
        assert!(HalfSliceGrid::new(m, 16, 32).is_err());
    }
}
