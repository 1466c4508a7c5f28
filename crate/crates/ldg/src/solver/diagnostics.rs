//! Post-solve diagnostics: axis singularities, the interior monotonicity quotient and
//! tangent-map fits at singular points.

use super::energy::{EnergyModel, Stencil};
use super::field::{norm_sqr, EquivariantField};
use super::grid::{HalfSliceGrid, NodeKind, NONE};
use super::{SolverError, SolverRun};
use crate::quadrature::pairwise_sum;
use crate::tensor_core::Sign;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Flank threshold: a sign change only counts between samples with |f0| above this.
pub const CONFIDENT_F0: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisSingularity {
    pub z: f64,
    /// `+` when -e0 sits below and e0 above.
    pub sign: Sign,
}

/// `f0` extrapolated linearly to the axis from the two innermost columns, as `(z, f0)`.
pub fn axis_profile(grid: &HalfSliceGrid, field: &EquivariantField) -> Vec<(f64, f64)> {
    (0..grid.n_z)
        .filter_map(|j| {
            let a = grid.at(0, j)?;
            let b = grid.at(1, j)?;
            let v = 1.5 * field.values[a][0] - 0.5 * field.values[b][0];
            Some((grid.z_of(j), v.clamp(-1.0, 1.0)))
        })
        .collect()
}

/// Sign changes of the axis profile between confident flanks.
pub fn axis_singularities(grid: &HalfSliceGrid, field: &EquivariantField) -> Vec<AxisSingularity> {
    let prof = axis_profile(grid, field);
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for (k, &(_, f0)) in prof.iter().enumerate() {
        if f0.abs() <= CONFIDENT_F0 {
            continue;
        }
        if let Some(l) = last {
            let below = prof[l].1;
            if below.signum() != f0.signum() {
                // First crossing between the flanks, linearly interpolated.
                let mut z = 0.5 * (prof[l].0 + prof[k].0);
                for m in l..k {
                    let (za, fa) = prof[m];
                    let (zb, fb) = prof[m + 1];
                    if fa == 0.0 {
                        z = za;
                        break;
                    }
                    if fa.signum() != fb.signum() {
                        z = za + (zb - za) * fa / (fa - fb);
                        break;
                    }
                }
                let sign = if below < 0.0 { Sign::Plus } else { Sign::Minus };
                out.push(AxisSingularity { z, sign });
            }
        }
        last = Some(k);
    }
    out
}

/// Axis singularities of a converged run.
pub fn detect_singularities(run: &SolverRun) -> Result<Vec<AxisSingularity>, SolverError> {
    if !run.is_converged() {
        return Err(SolverError::Unconverged);
    }
    Ok(axis_singularities(&run.grid, &run.field))
}

/// Energy attributed to each node: its node term plus half of each incident edge.
pub fn node_energies(grid: &HalfSliceGrid, field: &EquivariantField, lambda: f64) -> Vec<f64> {
    let st = Stencil::new(grid);
    let model = EnergyModel::projected(lambda);
    let mut e: Vec<f64> = (0..grid.len())
        .map(|k| st.mass[k] * super::energy::node_density(&field.values[k], grid.nodes[k].r, &model))
        .collect();
    for k in 0..grid.len() {
        let [_, r, _, u] = grid.neighbors[k];
        for (nb, c) in [(r, st.right[k]), (u, st.up[k])] {
            if nb != NONE {
                let w = &field.values[nb as usize];
                let v = &field.values[k];
                let d: f64 = (0..5).map(|i| (v[i] - w[i]).powi(2)).sum();
                e[k] += 0.5 * c * d;
                e[nb as usize] += 0.5 * c * d;
            }
        }
    }
    e
}

fn disc_inside(grid: &HalfSliceGrid, z0: f64, radius: f64) -> bool {
    (0..=256).all(|k| {
        let a = PI * k as f64 / 256.0;
        grid.domain.contains(radius * a.sin() * (1.0 - 1e-12), z0 + radius * a.cos() * (1.0 - 1e-12))
    })
}

/// Fraction of the cell at (r, z) inside the disc of `radius` about (0, z0).
fn disc_fraction(grid: &HalfSliceGrid, r: f64, z: f64, z0: f64, radius: f64) -> f64 {
    let (dr, dz) = (grid.dr, grid.dz);
    let d = (r * r + (z - z0).powi(2)).sqrt();
    let half_diag = 0.5 * (dr * dr + dz * dz).sqrt();
    if d + half_diag <= radius {
        return 1.0;
    }
    if d - half_diag >= radius {
        return 0.0;
    }
    const SUB: usize = 16;
    let mut hits = 0;
    for a in 0..SUB {
        for b in 0..SUB {
            let rr = r + ((a as f64 + 0.5) / SUB as f64 - 0.5) * dr;
            let zz = z + ((b as f64 + 0.5) / SUB as f64 - 0.5) * dz;
            if rr * rr + (zz - z0).powi(2) < radius * radius {
                hits += 1;
            }
        }
    }
    hits as f64 / (SUB * SUB) as f64
}

/// `(r, E(B_r(x0)) / r)` for balls about the axis point `(0, 0, z0)`.
pub fn monotonicity_profile_field(
    grid: &HalfSliceGrid,
    field: &EquivariantField,
    lambda: f64,
    z0: f64,
    radii: &[f64],
) -> Result<Vec<(f64, f64)>, SolverError> {
    for &radius in radii {
        if !(radius > 0.0) || !disc_inside(grid, z0, radius) {
            return Err(SolverError::BallOutsideDomain { z0, radius });
        }
    }
    let e = node_energies(grid, field, lambda);
    Ok(radii
        .iter()
        .map(|&radius| {
            let terms: Vec<f64> = grid
                .nodes
                .iter()
                .zip(&e)
                .map(|(n, ek)| ek * disc_fraction(grid, n.r, n.z, z0, radius))
                .collect();
            (radius, pairwise_sum(&terms) / radius)
        })
        .collect())
}

pub fn monotonicity_profile(run: &SolverRun, z0: f64, radii: &[f64]) -> Result<Vec<(f64, f64)>, SolverError> {
    monotonicity_profile_field(&run.grid, &run.field, run.lambda, z0, radii)
}

/// True when the profile never drops by more than `slack` relative to its running maximum.
pub fn is_nondecreasing(profile: &[(f64, f64)], slack: f64) -> bool {
    let mut best = f64::NEG_INFINITY;
    for &(_, v) in profile {
        if v < best * (1.0 - slack) {
            return false;
        }
        best = best.max(v);
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnulusFit {
    pub radius: f64,
    pub alpha: f64,
    pub sign: Sign,
    /// Mass-weighted RMS of `f - sign Q^(alpha)` over the annulus.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentFit {
    /// Fit on the smallest annulus.
    pub alpha: f64,
    pub sign: Sign,
    pub annuli: Vec<AnnulusFit>,
}

/// Closed-form least-squares fit of `+-Q^(alpha)` about the axis point `z_s` on annuli.
pub fn fit_tangent_field(
    grid: &HalfSliceGrid,
    field: &EquivariantField,
    z_s: f64,
    radii: &[f64],
) -> Result<TangentFit, SolverError> {
    let h = grid.dr.max(grid.dz);
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let mut annuli = Vec::new();
    for &rho in &radii {
        if !disc_inside(grid, z_s, rho + h) {
            return Err(SolverError::TooCloseToBoundary { z: z_s, radius: rho });
        }
        // sum m f . (cos t, e^{i a} sin t, 0) = A + Re(e^{i a} C)
        let (mut a, mut c_re, mut c_im, mut mass) = (0.0, 0.0, 0.0, 0.0);
        let mut shell = Vec::new();
        for k in 0..grid.len() {
            let n = &grid.nodes[k];
            if n.kind != NodeKind::Interior {
                continue;
            }
            let d = (n.r * n.r + (n.z - z_s).powi(2)).sqrt();
            if (d - rho).abs() > 0.5 * h {
                continue;
            }
            let (ct, st) = ((n.z - z_s) / d, n.r / d);
            let m = grid.mass(k);
            let v = &field.values[k];
            a += m * v[0] * ct;
            c_re += m * v[1] * st;
            c_im -= m * v[2] * st;
            mass += m;
            shell.push((k, ct, st, m));
        }
        if shell.is_empty() {
            return Err(SolverError::BadConfig(format!("annulus of radius {rho} contains no nodes")));
        }
        let arg = c_im.atan2(c_re);
        let (sign, alpha) = if a >= 0.0 { (Sign::Plus, -arg) } else { (Sign::Minus, PI - arg) };
        let alpha = alpha.rem_euclid(2.0 * PI);
        let s = sign.value();
        let (sa, ca) = alpha.sin_cos();
        let sq: f64 = shell
            .iter()
            .map(|&(k, ct, st, m)| {
                let model = [s * ct, s * st * ca, s * st * sa, 0.0, 0.0];
                let v = &field.values[k];
                m * (0..5).map(|i| (v[i] - model[i]).powi(2)).sum::<f64>()
            })
            .sum();
        annuli.push(AnnulusFit { radius: rho, alpha, sign, residual: (sq / mass).sqrt() });
    }
    let first = annuli.first().ok_or_else(|| SolverError::BadConfig("no radii".into()))?;
    Ok(TangentFit { alpha: first.alpha, sign: first.sign, annuli })
}

pub fn fit_tangent_map(run: &SolverRun, singularity: &AxisSingularity, radii: &[f64]) -> Result<TangentFit, SolverError> {
    if !run.is_converged() {
        return Err(SolverError::Unconverged);
    }
    fit_tangent_field(&run.grid, &run.field, singularity.z, radii)
}

/// `max_k |1 - |f_k|^2|` over interior nodes.
pub fn interior_norm_defect(grid: &HalfSliceGrid, field: &EquivariantField) -> f64 {
    grid.interior().map(|k| (1.0 - norm_sqr(&field.values[k])).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variation::TangentMap;

    fn sampled(grid: &HalfSliceGrid, tm: TangentMap, zc: f64) -> EquivariantField {
        EquivariantField::from_fn(grid, |r, z| {
            let d = (r * r + (z - zc).powi(2)).sqrt();
            tm.split_at([r / d, 0.0, (z - zc) / d])
        })
    }

    #[test]
    fn singularity_of_sampled_tangent_maps() {
        let g = HalfSliceGrid::ball(1.0, 32, 64).unwrap();
        let s = axis_singularities(&g, &sampled(&g, TangentMap::new(0.0, Sign::Plus), 0.1));
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].sign, Sign::Plus);
        assert!((s[0].z - 0.1).abs() < g.dz);
        let s = axis_singularities(&g, &sampled(&g, TangentMap::new(0.0, Sign::Minus), 0.0));
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].sign, Sign::Minus);
    }

    #[test]
    fn fit_recovers_rotation_and_sign() {
        let g = HalfSliceGrid::ball(1.0, 64, 128).unwrap();
        let f = sampled(&g, TangentMap::new(PI / 4.0, Sign::Plus), 0.0);
        let fit = fit_tangent_field(&g, &f, 0.0, &[0.2, 0.4]).unwrap();
        assert_eq!(fit.sign, Sign::Plus);
        assert!((fit.alpha - PI / 4.0).abs() < 1e-10);
        assert!(fit.annuli.iter().all(|a| a.residual < 1e-10));

        let f = sampled(&g, TangentMap::new(0.0, Sign::Minus), 0.0);
        let fit = fit_tangent_field(&g, &f, 0.0, &[0.3]).unwrap();
        assert_eq!(fit.sign, Sign::Minus);
        let wrapped = fit.alpha.rem_euclid(2.0 * PI);
        assert!(wrapped.min(2.0 * PI - wrapped) < 1e-10);
        assert!(matches!(
            fit_tangent_field(&g, &f, 0.0, &[0.99]),
            Err(SolverError::TooCloseToBoundary { .. })
        ));
    }

    #[test]
    fn monotonicity_of_a_homogeneous_map_is_flat() {
        // E(B_r)/r is constant for a 0-homogeneous map; the discrete quotient should be
        // nondecreasing up to discretization error and close to 4 pi.
        let g = HalfSliceGrid::ball(1.0, 128, 256).unwrap();
        let f = sampled(&g, TangentMap::new(0.0, Sign::Plus), 0.0);
        let prof = monotonicity_profile_field(&g, &f, 0.0, 0.0, &[0.2, 0.4, 0.6]).unwrap();
        assert!(is_nondecreasing(&prof, 0.02), "{prof:?}");
        for (_, q) in &prof {
            assert!((q / (4.0 * PI) - 1.0).abs() < 0.05, "{q}");
        }
    }
}
