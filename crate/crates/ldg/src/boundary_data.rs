//! Equivariant boundary traces: director fields given by an angle function, full harmonic
//! spheres and the tangent-map trace, sampled onto the boundary nodes of a grid.
//!
//! A trace is a map of the polar angle `theta` (from the +x3 axis) at azimuth 0; the full
//! field follows by equivariance. Boundary nodes off the sphere take the value at their
//! polar angle about the domain centre.

use crate::solver::grid::{Domain, HalfSliceGrid};
use crate::spheres::{eval_angles, SphereError, SphereSpec};
use crate::tensor_core::{biaxiality, join_iota, split_iota, sym_eigensystem, uniaxial_unchecked, Sign, SplitPoint};
use crate::variation::TangentMap;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error("angle function endpoints h(0) = {h0}, h(pi) = {h1} must lie in {{0, pi}}")]
    BadEndpoints { h0: f64, h1: f64 },
    #[error("trace at the {pole} pole is {value:?}, expected +-e0")]
    BadPole { pole: &'static str, value: [f64; 5] },
    #[error("profile `{0}` needs a parameter j >= 1")]
    MissingJ(String),
    #[error("trace has norm {norm} at theta = {theta}")]
    NotUnit { theta: f64, norm: f64 },
    #[error(transparent)]
    InvalidSpec(#[from] SphereError),
}

/// Angle functions for director data `v = (sin h cos phi, sin h sin phi, cos h)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `h(theta) = theta`: radial anchoring, the hedgehog trace.
    Radial,
    /// `h = 0`: the constant trace e0.
    Uniform,
    /// `h_j = hbar o Phi_j`: the torus family.
    Torus,
}

/// Boundary generator and parameters; echoed verbatim in run records.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Director {
        profile: Profile,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        j: Option<u32>,
    },
    FullSphere {
        #[serde(with = "complex_param")]
        mu1: C,
        #[serde(with = "complex_param")]
        mu2: C,
    },
    Tangent {
        #[serde(default)]
        alpha: f64,
    },
}

/// Complex parameters read as a number or a `[re, im]` pair, written as a pair.
mod complex_param {
    use num_complex::Complex64 as C;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Pair([f64; 2]),
    }

    pub fn serialize<S: Serializer>(c: &C, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Real(x) => C::new(x, 0.0),
            Repr::Pair([re, im]) => C::new(re, im),
        })
    }
}

impl BoundarySpec {
    pub fn director(profile: Profile) -> Self {
        BoundarySpec::Director { profile, j: None }
    }

    pub fn torus(j: u32) -> Self {
        BoundarySpec::Director { profile: Profile::Torus, j: Some(j) }
    }

    pub fn full_sphere(mu1: C, mu2: C) -> Self {
        BoundarySpec::FullSphere { mu1, mu2 }
    }

    pub fn tangent(alpha: f64) -> Self {
        BoundarySpec::Tangent { alpha }
    }

    pub fn validate(&self) -> Result<(), BoundaryError> {
        match *self {
            BoundarySpec::Director { profile: Profile::Torus, j } => match j {
                Some(j) if j >= 1 => Ok(()),
                _ => Err(BoundaryError::MissingJ("torus".into())),
            },
            BoundarySpec::Director { .. } => Ok(()),
            BoundarySpec::FullSphere { mu1, mu2 } => {
                if mu1.norm() == 0.0 && mu2.norm() == 0.0 {
                    return Err(SphereError::InvalidSpec("(mu1, mu2) = (0, 0)".into()).into());
                }
                SphereSpec::full(mu1, mu2).validate()?;
                Ok(())
            }
            BoundarySpec::Tangent { alpha } if !alpha.is_finite() => {
                Err(SphereError::InvalidSpec("alpha must be finite".into()).into())
            }
            BoundarySpec::Tangent { .. } => Ok(()),
        }
    }

    /// Angle function of a director spec.
    pub fn angle(&self, theta: f64) -> Option<f64> {
        match *self {
            BoundarySpec::Director { profile, j } => Some(match profile {
                Profile::Radial => theta,
                Profile::Uniform => 0.0,
                Profile::Torus => torus_angle(j.unwrap_or(1) as f64, theta),
            }),
            _ => None,
        }
    }

    /// Trace at polar angle `theta`, azimuth 0.
    pub fn eval(&self, theta: f64) -> SplitPoint {
        match *self {
            BoundarySpec::Director { .. } => {
                let h = self.angle(theta).unwrap_or(0.0);
                split_iota(&uniaxial_unchecked([h.sin(), 0.0, h.cos()]))
            }
            BoundarySpec::FullSphere { mu1, mu2 } => eval_angles(&SphereSpec::full(mu1, mu2), theta, 0.0),
            BoundarySpec::Tangent { alpha } => {
                TangentMap::new(alpha, Sign::Plus).split_at([theta.sin(), 0.0, theta.cos()])
            }
        }
    }

    /// Degree of the director field: from the angle function for director data, else by
    /// following the top eigenvector along the meridian (None where it is not simple).
    pub fn degree(&self) -> Option<i32> {
        if let Some(h0) = self.angle(0.0) {
            let h1 = self.angle(PI).unwrap_or(0.0);
            return Some(((h0.cos() - h1.cos()) / 2.0).round() as i32);
        }
        tracked_degree(|t| self.eval(t), 4096)
    }
}

/// Quintic smoothstep angle function: 0 on [0, pi/6], pi on [5pi/6, pi], C2, and
/// `hbar(pi - theta) = pi - hbar(theta)`.
pub fn hbar(theta: f64) -> f64 {
    let t = ((theta - PI / 6.0) / (2.0 * PI / 3.0)).clamp(0.0, 1.0);
    PI * t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

/// `h_j = hbar o Phi_j` with the Moebius squeeze `Phi_rho(w) = (w - a)/(1 - a w)`,
/// `a = 1 - 1/rho`, acting on the meridian disc `w = x1 + i x3`.
pub fn torus_angle(rho: f64, theta: f64) -> f64 {
    let a = 1.0 - 1.0 / rho;
    let w = C::new(theta.sin(), theta.cos());
    let m = (w - a) / (C::new(1.0, 0.0) - w * a);
    // Boundary angle of m, continued to (-pi/2, 3pi/2) through the right half of the circle.
    let mut t = m.re.atan2(m.im);
    if t < -FRAC_PI_2 {
        t += 2.0 * PI;
    }
    if t <= 0.0 {
        0.0
    } else if t >= PI {
        PI
    } else {
        hbar(t)
    }
}

fn tracked_degree(f: impl Fn(f64) -> SplitPoint, n: usize) -> Option<i32> {
    let mut prev: Option<[f64; 3]> = None;
    for k in 0..=n {
        let theta = PI * k as f64 / n as f64;
        let m = join_iota(&f(theta)).to_matrix();
        let es = sym_eigensystem(&m);
        if es.values[2] - es.values[1] < 1e-9 {
            return None;
        }
        let mut v = es.vectors[2];
        match prev {
            None => {
                if v[2] < 0.0 {
                    v = v.map(|x| -x);
                }
            }
            Some(p) => {
                if v[0] * p[0] + v[1] * p[1] + v[2] * p[2] < 0.0 {
                    v = v.map(|x| -x);
                }
            }
        }
        prev = Some(v);
    }
    prev.map(|v| ((1.0 - v[2]) / 2.0).round() as i32)
}

/// Trace sampled on the boundary nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTrace {
    pub spec: BoundarySpec,
    /// `(node index, value)` for every boundary node, in grid order.
    pub values: Vec<(usize, SplitPoint)>,
    pub north: SplitPoint,
    pub south: SplitPoint,
    pub degree: Option<i32>,
    /// Minimum signed biaxiality over the boundary nodes.
    pub beta_min: f64,
    /// Axial centre the polar angle is measured from.
    pub center_z: f64,
}

impl BoundaryTrace {
    pub fn sample(spec: BoundarySpec, grid: &HalfSliceGrid) -> Result<Self, BoundaryError> {
        spec.validate()?;
        if let Some(h0) = spec.angle(0.0) {
            let h1 = spec.angle(PI).unwrap_or(0.0);
            let ok = |h: f64| h.abs() < 1e-12 || (h - PI).abs() < 1e-12;
            if !ok(h0) || !ok(h1) {
                return Err(BoundaryError::BadEndpoints { h0, h1 });
            }
        }
        let north = pole(&spec, 0.0, "north")?;
        let south = pole(&spec, PI, "south")?;
        let center_z = domain_center(&grid.domain);
        let mut values = Vec::new();
        let mut beta_min = f64::INFINITY;
        for k in grid.boundary() {
            let n = &grid.nodes[k];
            let theta = n.r.atan2(n.z - center_z);
            let p = spec.eval(theta);
            let norm = p.norm();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(BoundaryError::NotUnit { theta, norm });
            }
            let p = p.scale(1.0 / norm);
            beta_min = beta_min.min(biaxiality(&join_iota(&p)).unwrap_or(-1.0));
            values.push((k, p));
        }
        Ok(Self { spec, values, north, south, degree: spec.degree(), beta_min, center_z })
    }

    /// Trace value at polar angle `theta` (azimuth 0).
    pub fn eval(&self, theta: f64) -> SplitPoint {
        if theta <= 0.0 {
            return self.north;
        }
        if theta >= PI {
            return self.south;
        }
        self.spec.eval(theta)
    }

    /// 0-homogeneous extension at a point of the half-slice.
    pub fn extend(&self, r: f64, z: f64) -> SplitPoint {
        self.eval(r.atan2(z - self.center_z))
    }

    /// (HP1): the boundary data avoids the negative uniaxial set.
    /// The pole values count too, since the nearest nodes can sit arbitrarily close to them.
    pub fn hp1(&self) -> bool {
        let pole = |p: &SplitPoint| biaxiality(&join_iota(p)).unwrap_or(-1.0);
        self.beta_min.min(pole(&self.north)).min(pole(&self.south)) > -1.0 + crate::topology::HP1_MARGIN
    }

    /// (HP3): the director degree is odd.
    pub fn hp3(&self) -> bool {
        self.degree.is_some_and(|d| d % 2 != 0)
    }
}

fn pole(spec: &BoundarySpec, theta: f64, name: &'static str) -> Result<SplitPoint, BoundaryError> {
    let p = spec.eval(theta);
    if p.zeta1.norm() > 1e-10 || p.zeta2.norm() > 1e-10 || (p.t.abs() - 1.0).abs() > 1e-10 {
        return Err(BoundaryError::BadPole { pole: name, value: p.to_array() });
    }
    Ok(SplitPoint::new(p.t.signum(), C::new(0.0, 0.0), C::new(0.0, 0.0)))
}

fn domain_center(d: &Domain) -> f64 {
    let (_, lo, hi) = d.bounds();
    0.5 * (lo + hi)
}

/// `sqrt(int_{S^2} |a - b|^2)` between two traces, by latitude quadrature.
pub fn trace_l2_distance(a: &BoundarySpec, b: &BoundarySpec, n_quad: usize) -> f64 {
    let rule = crate::quadrature::Rule::composite(8, n_quad.max(8) / 8, 0.0, PI);
    let v = rule.integrate(|t| (a.eval(t) - b.eval(t)).norm_sqr() * t.sin());
    (2.0 * PI * v).sqrt()
}

/// Shorthand constructors mirroring the three families.
pub fn director_trace(profile: Profile, j: Option<u32>, grid: &HalfSliceGrid) -> Result<BoundaryTrace, BoundaryError> {
    BoundaryTrace::sample(BoundarySpec::Director { profile, j }, grid)
}

pub fn full_sphere_trace(mu1: C, mu2: C, grid: &HalfSliceGrid) -> Result<BoundaryTrace, BoundaryError> {
    BoundaryTrace::sample(BoundarySpec::full_sphere(mu1, mu2), grid)
}

pub fn tangent_trace(alpha: f64, grid: &HalfSliceGrid) -> Result<BoundaryTrace, BoundaryError> {
    BoundaryTrace::sample(BoundarySpec::tangent(alpha), grid)
}

/// The split-family parameter sequence `mu2_j = 2^-j`.
pub fn split_mu2(j: u32) -> f64 {
    0.5f64.powi(j as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> HalfSliceGrid {
        HalfSliceGrid::ball(1.0, 16, 32).unwrap()
    }

    #[test]
    fn tangent_trace_values() {
        let s = BoundarySpec::tangent(0.0);
        assert!((s.eval(0.0) - SplitPoint::new(1.0, C::new(0.0, 0.0), C::new(0.0, 0.0))).norm() < 1e-15);
        assert!((s.eval(PI) - SplitPoint::new(-1.0, C::new(0.0, 0.0), C::new(0.0, 0.0))).norm() < 1e-15);
        let eq = s.eval(FRAC_PI_2);
        assert!((eq - SplitPoint::new(0.0, C::new(1.0, 0.0), C::new(0.0, 0.0))).norm() < 1e-15);
        let t = BoundaryTrace::sample(s, &grid()).unwrap();
        assert!(!t.hp1());
        assert_eq!(t.degree, None);
    }

    #[test]
    fn director_degrees() {
        assert_eq!(BoundarySpec::director(Profile::Radial).degree(), Some(1));
        assert_eq!(BoundarySpec::director(Profile::Uniform).degree(), Some(0));
        assert_eq!(BoundarySpec::torus(8).degree(), Some(1));
        let t = director_trace(Profile::Uniform, None, &grid()).unwrap();
        assert!(t.values.iter().all(|(_, p)| (p.t - 1.0).abs() < 1e-15));
        assert_eq!(t.beta_min, 1.0);
    }

    #[test]
    fn radial_is_the_hedgehog() {
        let d = BoundarySpec::director(Profile::Radial);
        let f = BoundarySpec::full_sphere(C::new(3f64.sqrt(), 0.0), C::new(3f64.sqrt(), 0.0));
        for k in 0..50 {
            let t = PI * k as f64 / 49.0;
            assert!((d.eval(t) - f.eval(t)).norm() < 1e-12, "theta {t}");
        }
    }

    #[test]
    fn degenerate_full_trace_is_the_tangent_trace() {
        let f = BoundarySpec::full_sphere(C::new(1.0, 0.0), C::new(0.0, 0.0));
        let t = BoundarySpec::tangent(0.0);
        for k in 0..50 {
            let th = PI * k as f64 / 49.0;
            assert!((f.eval(th) - t.eval(th)).norm() < 1e-12);
        }
    }

    #[test]
    fn split_trace_satisfies_hp1_and_hp3() {
        let t = full_sphere_trace(C::new(1.0, 0.0), C::new(0.05, 0.0), &grid()).unwrap();
        assert!(t.hp1(), "{}", t.beta_min);
        assert!(t.hp3(), "{:?}", t.degree);
    }

    #[test]
    fn hbar_shape() {
        assert_eq!(hbar(0.1), 0.0);
        assert_eq!(hbar(3.0), PI);
        assert!((hbar(FRAC_PI_2) - FRAC_PI_2).abs() < 1e-14);
        for k in 0..100 {
            let t = PI * k as f64 / 99.0;
            assert!((hbar(PI - t) - (PI - hbar(t))).abs() < 1e-12);
        }
        // rho = 1 is the identity squeeze.
        for k in 0..100 {
            let t = PI * k as f64 / 99.0;
            assert!((torus_angle(1.0, t) - hbar(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn torus_band_shrinks() {
        let band = |j: u32| {
            let s = BoundarySpec::torus(j);
            let n = 20_000;
            (0..n)
                .filter(|&k| {
                    let t = PI * (k as f64 + 0.5) / n as f64;
                    (s.eval(t).t - 1.0).abs() > 1e-6
                })
                .count()
        };
        let (b2, b4, b8) = (band(2), band(4), band(8));
        assert!(b2 > b4 && b4 > b8 && b8 > 0, "{b2} {b4} {b8}");
    }

    #[test]
    fn bad_specs() {
        assert!(matches!(BoundarySpec::Director { profile: Profile::Torus, j: None }.validate(), Err(BoundaryError::MissingJ(_))));
        assert!(BoundarySpec::full_sphere(C::new(0.0, 0.0), C::new(0.0, 0.0)).validate().is_err());
    }

    #[test]
    fn spec_round_trips_through_toml() {
        for s in [BoundarySpec::torus(8), BoundarySpec::full_sphere(C::new(1.0, 0.0), C::new(0.05, 0.5)), BoundarySpec::tangent(0.3)] {
            let text = toml::to_string(&s).unwrap();
            let back: BoundarySpec = toml::from_str(&text).unwrap();
            assert_eq!(s, back);
        }
        let s: BoundarySpec = toml::from_str("kind = \"full_sphere\"\nmu1 = 1.0\nmu2 = [0.05, 0.0]").unwrap();
        assert_eq!(s, BoundarySpec::full_sphere(C::new(1.0, 0.0), C::new(0.05, 0.0)));
    }
}
