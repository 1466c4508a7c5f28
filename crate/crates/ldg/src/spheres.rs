//! S1-equivariant harmonic spheres S^2 -> S^4: stereographic charts, the degenerate and
//! linearly full families, twistor curves in CP^3 and the twistor fibration, lifts, and
//! finite-difference checks of the identities these maps satisfy.
//!
//! Points of S^2 use homogeneous coordinates `[z0, z1]` with `z = z1/z0` the stereographic
//! coordinate from the south pole, so `[1, 0]` is the north pole.

use crate::quadrature::refine_until;
use crate::tensor_core::{Sign, SplitPoint};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SphereError {
    #[error("invalid sphere spec: {0}")]
    InvalidSpec(String),
    #[error("homogeneous coordinates [z0, z1] are both zero")]
    BothZero,
    #[error("twistor fibration is undefined at the zero vector")]
    ZeroVector,
    #[error("quadrature under-resolved: successive refinements differ by {rel_change:e} (relative)")]
    QuadratureUnderResolved { rel_change: f64 },
    #[error("point theta = {theta} is within {min_dist} of a pole")]
    PoleProximity { theta: f64, min_dist: f64 },
    #[error("lift jet vanishes at z = {0}")]
    DegenerateJet(C),
    #[error("operation needs a linearly full sphere")]
    NotFull,
}

/// A point of the 2-sphere in any of its three usual descriptions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum S2Point {
    Cartesian([f64; 3]),
    Homogeneous(C, C),
    Spherical { theta: f64, phi: f64 },
}

impl S2Point {
    pub fn spherical(theta: f64, phi: f64) -> Self {
        S2Point::Spherical { theta, phi }
    }

    pub fn plane(z: C) -> Self {
        S2Point::Homogeneous(C::new(1.0, 0.0), z)
    }

    /// Unit-norm homogeneous representative.
    pub fn homogeneous(&self) -> Result<(C, C), SphereError> {
        let (a, b) = match *self {
            S2Point::Homogeneous(a, b) => (a, b),
            S2Point::Spherical { theta, phi } => (
                C::new((0.5 * theta).cos(), 0.0),
                C::from_polar((0.5 * theta).sin(), phi),
            ),
            S2Point::Cartesian(x) => {
                let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                if n == 0.0 {
                    return Err(SphereError::BothZero);
                }
                let x = x.map(|v| v / n);
                // Pick the chart that stays away from 0/0.
                if x[2] >= 0.0 {
                    (C::new(1.0 + x[2], 0.0), C::new(x[0], x[1]))
                } else {
                    (C::new(x[0], -x[1]), C::new(1.0 - x[2], 0.0))
                }
            }
        };
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(SphereError::BothZero);
        }
        Ok((a / n, b / n))
    }

    pub fn cartesian(&self) -> Result<[f64; 3], SphereError> {
        if let S2Point::Cartesian(x) = *self {
            let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if n == 0.0 {
                return Err(SphereError::BothZero);
            }
            return Ok(x.map(|v| v / n));
        }
        let (a, b) = self.homogeneous()?;
        let s = a.norm_sqr() + b.norm_sqr();
        let w = a.conj() * b * 2.0 / s;
        Ok([w.re, w.im, (a.norm_sqr() - b.norm_sqr()) / s])
    }

    /// (theta, phi) with theta in [0, pi] and phi in [0, 2 pi).
    pub fn angles(&self) -> Result<(f64, f64), SphereError> {
        let x = self.cartesian()?;
        let theta = x[2].clamp(-1.0, 1.0).acos();
        let mut phi = x[1].atan2(x[0]);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        Ok((theta, phi))
    }
}

/// Inverse stereographic projection C -> S^2; a non-finite input is the south pole.
pub fn stereo2_inv(z: C) -> [f64; 3] {
    if !z.re.is_finite() || !z.im.is_finite() {
        return [0.0, 0.0, -1.0];
    }
    let m = z.norm_sqr();
    if m <= 1.0 {
        let d = 1.0 + m;
        [2.0 * z.re / d, 2.0 * z.im / d, (1.0 - m) / d]
    } else {
        // Same map written in 1/|z|^2 to avoid overflow for huge |z|.
        let s = 1.0 / m;
        let d = s + 1.0;
        [2.0 * z.re * s / d, 2.0 * z.im * s / d, (s - 1.0) / d]
    }
}

/// Stereographic projection S^2 -> C from the south pole; `None` at the south pole.
pub fn stereo2(x: [f64; 3]) -> Option<C> {
    let d = 1.0 + x[2];
    if d <= 0.0 {
        return None;
    }
    Some(C::new(x[0] / d, x[1] / d))
}

/// Stereographic chart of S^4 from the south pole -e0: `(xi, eta) = (w1, w2)/(1 + w0)`.
pub fn stereo4(p: &SplitPoint) -> Option<(C, C)> {
    let d = 1.0 + p.t;
    if d <= 0.0 {
        return None;
    }
    Some((p.zeta1 / d, p.zeta2 / d))
}

pub fn stereo4_inv(xi: C, eta: C) -> SplitPoint {
    let s = xi.norm_sqr() + eta.norm_sqr();
    let d = 1.0 + s;
    SplitPoint::new((1.0 - s) / d, xi * (2.0 / d), eta * (2.0 / d))
}

/// Catalog entry for an equivariant harmonic sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SphereSpec {
    /// `sign * w_eq^(k)(sigma2^-1(mu z^k))`, energy 4 pi k.
    Degenerate { k: u8, mu: C, sign: Sign },
    /// `tau([z0^3, mu1 z0^2 z1, mu2 z0 z1^2, -mu1 mu2 z1^3 / 3])`, energy 12 pi when both are nonzero.
    Full { mu1: C, mu2: C },
    /// The equatorial 2-sphere in the L0 + L_k slot: `x -> (x3, x1 + i x2)` placed in slot k.
    EquatorialEmbedding { k: u8 },
}

impl SphereSpec {
    pub fn degenerate(k: u8, mu: C, sign: Sign) -> Self {
        SphereSpec::Degenerate { k, mu, sign }
    }

    pub fn full(mu1: C, mu2: C) -> Self {
        SphereSpec::Full { mu1, mu2 }
    }

    pub fn full_real(mu1: f64, mu2: f64) -> Self {
        SphereSpec::Full { mu1: C::new(mu1, 0.0), mu2: C::new(mu2, 0.0) }
    }

    pub fn validate(&self) -> Result<(), SphereError> {
        match *self {
            SphereSpec::Degenerate { k, mu, .. } => {
                if k != 1 && k != 2 {
                    return Err(SphereError::InvalidSpec(format!("degenerate degree k = {k}, expected 1 or 2")));
                }
                if mu.norm() == 0.0 || !mu.norm().is_finite() {
                    return Err(SphereError::InvalidSpec("degenerate sphere needs mu != 0".into()));
                }
            }
            SphereSpec::Full { mu1, mu2 } => {
                if !(mu1.norm().is_finite() && mu2.norm().is_finite()) {
                    return Err(SphereError::InvalidSpec("non-finite parameter".into()));
                }
            }
            SphereSpec::EquatorialEmbedding { k } => {
                if k != 1 && k != 2 {
                    return Err(SphereError::InvalidSpec(format!("embedding slot k = {k}, expected 1 or 2")));
                }
            }
        }
        Ok(())
    }

    /// Full spec with both parameters nonzero.
    pub fn is_linearly_full(&self) -> bool {
        matches!(*self, SphereSpec::Full { mu1, mu2 } if mu1.norm() > 0.0 && mu2.norm() > 0.0)
    }

    /// Azimuthal degrees of the two complex slots, so `|d_phi w|^2 = d1^2|w1|^2 + d2^2|w2|^2`.
    pub fn phi_degrees(&self) -> (f64, f64) {
        match *self {
            SphereSpec::EquatorialEmbedding { k: 2 } => (1.0, 1.0),
            _ => (1.0, 2.0),
        }
    }

    /// Expected energy 4 pi |d|.
    pub fn expected_energy(&self) -> f64 {
        match *self {
            SphereSpec::Degenerate { k, .. } => 4.0 * PI * k as f64,
            SphereSpec::EquatorialEmbedding { .. } => 4.0 * PI,
            SphereSpec::Full { mu1, mu2 } => {
                let d = match (mu1.norm() > 0.0, mu2.norm() > 0.0) {
                    (true, true) => 3.0,
                    (true, false) => 1.0,
                    (false, true) => 2.0,
                    (false, false) => 0.0,
                };
                4.0 * PI * d
            }
        }
    }
}

/// `(t, zeta) = sign (|a|^2 - |b|^2, 2 conj(a) b)/(|a|^2 + |b|^2)`: w_eq at the point `b/a`.
fn equatorial(a: C, b: C, sign: f64) -> (f64, C) {
    let s = a.norm_sqr() + b.norm_sqr();
    (sign * (a.norm_sqr() - b.norm_sqr()) / s, a.conj() * b * (2.0 * sign / s))
}

pub fn eval_sphere(s: &SphereSpec, p: &S2Point) -> Result<SplitPoint, SphereError> {
    s.validate()?;
    let (z0, z1) = p.homogeneous()?;
    Ok(eval_homogeneous(s, z0, z1))
}

/// Evaluation on an already normalized homogeneous pair.
pub(crate) fn eval_homogeneous(s: &SphereSpec, z0: C, z1: C) -> SplitPoint {
    let zero = C::new(0.0, 0.0);
    match *s {
        SphereSpec::Degenerate { k, mu, sign } => {
            let (a, b) = if k == 1 { (z0, mu * z1) } else { (z0 * z0, mu * z1 * z1) };
            let (t, w) = equatorial(a, b, sign.value());
            if k == 1 {
                SplitPoint::new(t, w, zero)
            } else {
                SplitPoint::new(t, zero, w)
            }
        }
        SphereSpec::EquatorialEmbedding { k } => {
            let (t, w) = equatorial(z0, z1, 1.0);
            if k == 1 {
                SplitPoint::new(t, w, zero)
            } else {
                SplitPoint::new(t, zero, w)
            }
        }
        SphereSpec::Full { mu1, mu2 } => {
            let n1 = mu1.norm_sqr();
            let n2 = mu2.norm_sqr();
            match (n1 > 0.0, n2 > 0.0) {
                // The general formula has 0/0 at a pole in these cases; use the limits.
                (true, false) => eval_homogeneous(&SphereSpec::degenerate(1, mu1, Sign::Plus), z0, z1),
                (false, true) => eval_homogeneous(&SphereSpec::degenerate(2, mu2, Sign::Plus), z0, z1),
                (false, false) => SplitPoint::new(1.0, zero, zero),
                (true, true) => {
                    let a = z0.norm_sqr();
                    let b = z1.norm_sqr();
                    let (a2, b2) = (a * a, b * b);
                    let tail = n1 * n2 / 9.0 * b2 * b;
                    let d = a2 * a + n1 * a2 * b + n2 * a * b2 + tail;
                    let t = (a2 * a - n1 * a2 * b - n2 * a * b2 + tail) / d;
                    let w1 = mu1 * z0.conj() * z1 * (2.0 * (a2 - n2 / 3.0 * b2) / d);
                    let w2 = mu2 * z0.conj() * z0.conj() * z1 * z1 * (2.0 * (a + n1 / 3.0 * b) / d);
                    SplitPoint::new(t, w1, w2)
                }
            }
        }
    }
}

/// Evaluation at polar angle `theta` and azimuth `phi`; `theta` may leave [0, pi].
pub fn eval_angles(s: &SphereSpec, theta: f64, phi: f64) -> SplitPoint {
    let z0 = C::new((0.5 * theta).cos(), 0.0);
    let z1 = C::from_polar((0.5 * theta).sin(), phi);
    eval_homogeneous(s, z0, z1)
}

/// Evaluation in the plane chart, `z = z1/z0`.
pub fn eval_plane(s: &SphereSpec, z: C) -> SplitPoint {
    let n = (1.0 + z.norm_sqr()).sqrt();
    eval_homogeneous(s, C::new(1.0 / n, 0.0), z / n)
}

/// Algebraic curve `[mu0 z0^3, mu1 z0^2 z1, mu2 z0 z1^2, mu3 z1^3]` in CP^3.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistorCurve {
    pub mu: [C; 4],
}

impl TwistorCurve {
    pub fn new(mu: [C; 4]) -> Result<Self, SphereError> {
        let nz = mu.iter().filter(|m| m.norm() > 0.0).count();
        if nz < 2 {
            return Err(SphereError::InvalidSpec("twistor curve needs two nonzero parameters".into()));
        }
        Ok(Self { mu })
    }

    /// The horizontal curve with `mu0 = 1` that projects onto `Full(mu1, mu2)`.
    pub fn horizontal(mu1: C, mu2: C) -> Result<Self, SphereError> {
        Self::new([C::new(1.0, 0.0), mu1, mu2, -mu1 * mu2 / 3.0])
    }

    pub fn algebraic_residual(&self) -> f64 {
        (self.mu[0] * self.mu[3] + self.mu[1] * self.mu[2] / 3.0).norm()
    }

    pub fn is_horizontal(&self) -> bool {
        self.algebraic_residual() <= 1e-12
    }

    fn raw(&self, z0: C, z1: C) -> [C; 4] {
        let m = &self.mu;
        [m[0] * z0 * z0 * z0, m[1] * z0 * z0 * z1, m[2] * z0 * z1 * z1, m[3] * z1 * z1 * z1]
    }
}

/// Unit norm with the first non-negligible coordinate real and positive.
pub fn canonical_cp3(w: [C; 4]) -> Result<[C; 4], SphereError> {
    let n = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 || !n.is_finite() {
        return Err(SphereError::ZeroVector);
    }
    let lead = w.iter().find(|c| c.norm() > 1e-12 * n).copied().unwrap_or(w[0]);
    let phase = lead.conj() / lead.norm();
    Ok(w.map(|c| c * phase / n))
}

/// Fubini-Study-type chordal distance `min_phase |u - e^{i a} v|` between unit representatives.
pub fn projective_distance(u: &[C; 4], v: &[C; 4]) -> f64 {
    let nu = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nv = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let ip: C = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    (2.0 - 2.0 * (ip.norm() / (nu * nv)).min(1.0)).max(0.0).sqrt()
}

pub fn twistor_curve_eval(c: &TwistorCurve, p: &S2Point) -> Result<[C; 4], SphereError> {
    let (z0, z1) = p.homogeneous()?;
    canonical_cp3(c.raw(z0, z1))
}

/// The twistor fibration CP^3 -> S^4.
pub fn twistor_project(w: &[C; 4]) -> Result<SplitPoint, SphereError> {
    let n: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    if n == 0.0 || !n.is_finite() {
        return Err(SphereError::ZeroVector);
    }
    // Scale first so huge or tiny representatives give the same answer.
    let s = 1.0 / n.sqrt();
    let [w0, w1, w2, w3] = w.map(|c| c * s);
    let t = w0.norm_sqr() + w3.norm_sqr() - w1.norm_sqr() - w2.norm_sqr();
    let a = (w0.conj() * w1 + w2.conj() * w3) * 2.0;
    let b = (w0.conj() * w2 - w1.conj() * w3) * 2.0;
    let d = w0.norm_sqr() + w1.norm_sqr() + w2.norm_sqr() + w3.norm_sqr();
    Ok(SplitPoint::new(t / d, a / d, b / d))
}

/// Both horizontality residuals of a curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Horizontality {
    /// `|mu0 mu3 + mu1 mu2 / 3|`.
    pub algebraic: f64,
    /// Max over sample points of `|Phi^* Theta| / |Phi|^2` with `Phi'` from central differences.
    pub pullback: f64,
}

/// Algebraic residual, with the sampled pullback of the contact form alongside.
pub fn horizontality_residual(c: &TwistorCurve) -> f64 {
    horizontality_report(c).algebraic
}

pub fn horizontality_report(c: &TwistorCurve) -> Horizontality {
    let h = 1e-6;
    let one = C::new(1.0, 0.0);
    let mut worst: f64 = 0.0;
    for i in 0..8 {
        for &rad in &[0.3, 0.8, 1.5] {
            let z = C::from_polar(rad, i as f64 * PI / 4.0 + 0.1);
            let w = c.raw(one, z);
            let wp = c.raw(one, z + h);
            let wm = c.raw(one, z - h);
            let d: Vec<C> = (0..4).map(|k| (wp[k] - wm[k]) / (2.0 * h)).collect();
            let theta = w[0] * d[3] - w[3] * d[0] + w[1] * d[2] - w[2] * d[1];
            let n: f64 = w.iter().map(|x| x.norm_sqr()).sum();
            worst = worst.max(theta.norm() / n);
        }
    }
    Horizontality { algebraic: c.algebraic_residual(), pullback: worst }
}

/// Squared theta-derivative by the 5-point stencil.
fn dtheta_sqr(s: &SphereSpec, theta: f64, h: f64) -> f64 {
    let f = |t: f64| eval_angles(s, t, 0.0).to_array();
    let (m2, m1, p1, p2) = (f(theta - 2.0 * h), f(theta - h), f(theta + h), f(theta + 2.0 * h));
    (0..5)
        .map(|k| {
            let d = (m2[k] - 8.0 * m1[k] + 8.0 * p1[k] - p2[k]) / (12.0 * h);
            d * d
        })
        .sum()
}

/// `|grad_T w|^2` at polar angle `theta` (azimuth-independent by equivariance).
pub fn energy_density(s: &SphereSpec, theta: f64) -> f64 {
    let w = eval_angles(s, theta, 0.0);
    let (d1, d2) = s.phi_degrees();
    let phi_part = d1 * d1 * w.zeta1.norm_sqr() + d2 * d2 * w.zeta2.norm_sqr();
    let st = theta.sin();
    dtheta_sqr(s, theta, 1e-3) + phi_part / (st * st)
}

/// Dirichlet energy `1/2 int |grad_T w|^2` by latitude quadrature.
pub fn sphere_energy(s: &SphereSpec, n_quad: usize) -> Result<f64, SphereError> {
    s.validate()?;
    if n_quad < 64 {
        return Err(SphereError::InvalidSpec(format!("n_quad = {n_quad} < 64")));
    }
    let r = refine_until(|t| 0.5 * 2.0 * PI * energy_density(s, t) * t.sin(), 0.0, PI, n_quad, 1e-6);
    if r.rel_change > 1e-4 {
        return Err(SphereError::QuadratureUnderResolved { rel_change: r.rel_change });
    }
    Ok(r.value)
}

fn check_pole(theta: f64, h: f64) -> Result<(), SphereError> {
    let min_dist = 10.0 * h;
    if theta < min_dist || theta > PI - min_dist {
        return Err(SphereError::PoleProximity { theta, min_dist });
    }
    Ok(())
}

fn check_step(h: f64) -> Result<(), SphereError> {
    if !(1e-5..=1e-2).contains(&h) {
        return Err(SphereError::InvalidSpec(format!("step h = {h} outside [1e-5, 1e-2]")));
    }
    Ok(())
}

/// `Delta_T w + |grad_T w|^2 w` by second-order differences at step h.
fn tension_vector(s: &SphereSpec, theta: f64, phi: f64, h: f64) -> [f64; 5] {
    let w = eval_angles(s, theta, phi).to_array();
    let tp = eval_angles(s, theta + h, phi).to_array();
    let tm = eval_angles(s, theta - h, phi).to_array();
    let pp = eval_angles(s, theta, phi + h).to_array();
    let pm = eval_angles(s, theta, phi - h).to_array();
    let (st, ct) = theta.sin_cos();
    let mut lap = [0.0; 5];
    let mut grad2 = 0.0;
    for k in 0..5 {
        let wt = (tp[k] - tm[k]) / (2.0 * h);
        let wtt = (tp[k] - 2.0 * w[k] + tm[k]) / (h * h);
        let wp = (pp[k] - pm[k]) / (2.0 * h);
        let wpp = (pp[k] - 2.0 * w[k] + pm[k]) / (h * h);
        lap[k] = wtt + ct / st * wt + wpp / (st * st);
        grad2 += wt * wt + wp * wp / (st * st);
    }
    let mut out = [0.0; 5];
    for k in 0..5 {
        out[k] = lap[k] + grad2 * w[k];
    }
    out
}

/// Norm of the harmonic-map tension, Richardson-extrapolated from steps h and 2h.
pub fn tension_residual(s: &SphereSpec, p: &S2Point, h: f64) -> Result<f64, SphereError> {
    s.validate()?;
    check_step(h)?;
    let (theta, phi) = p.angles()?;
    check_pole(theta, h)?;
    let a = tension_vector(s, theta, phi, h);
    let b = tension_vector(s, theta, phi, 2.0 * h);
    Ok((0..5).map(|k| ((4.0 * a[k] - b[k]) / 3.0).powi(2)).sum::<f64>().sqrt())
}

/// Gaps in the conformality relations and in the complex identities for `(xi, eta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConformalityGap {
    /// `| |d_theta w|^2 - |d_phi w|^2 / sin^2 |`.
    pub length_gap: f64,
    /// `| d_theta w . d_phi w / sin |`.
    pub angle_gap: f64,
    /// `|xi_zb conj(xi)_zb + eta_zb conj(eta)_zb|` over half the sum of the squared factors
    /// (floored at 1), absent near the chart's pole.
    pub conf_residual: Option<f64>,
    /// The same for `xi_zbzb conj(xi)_zbzb + eta_zbzb conj(eta)_zbzb`.
    pub iso_residual: Option<f64>,
}

impl ConformalityGap {
    pub fn pair(&self) -> (f64, f64) {
        (self.length_gap, self.angle_gap)
    }

    pub fn max(&self) -> f64 {
        [self.length_gap, self.angle_gap, self.conf_residual.unwrap_or(0.0), self.iso_residual.unwrap_or(0.0)]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn angle_gaps(s: &SphereSpec, theta: f64, phi: f64, h: f64) -> (f64, f64) {
    let tp = eval_angles(s, theta + h, phi).to_array();
    let tm = eval_angles(s, theta - h, phi).to_array();
    let pp = eval_angles(s, theta, phi + h).to_array();
    let pm = eval_angles(s, theta, phi - h).to_array();
    let st = theta.sin();
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for k in 0..5 {
        let wt = (tp[k] - tm[k]) / (2.0 * h);
        let wp = (pp[k] - pm[k]) / (2.0 * h) / st;
        a += wt * wt;
        b += wp * wp;
        c += wt * wp;
    }
    (a - b, c)
}

/// `(xi, eta)` of the sphere in the plane chart.
fn xi_eta(s: &SphereSpec, z: C) -> Option<(C, C)> {
    let w = eval_plane(s, z);
    if 1.0 + w.t < 1e-6 {
        return None;
    }
    stereo4(&w)
}

/// d/d(zbar) by central differences along the real and imaginary directions.
fn d_zbar(f: &impl Fn(C) -> C, z: C, h: f64) -> C {
    let i = C::new(0.0, 1.0);
    let dx = (f(z + h) - f(z - h)) / (2.0 * h);
    let dy = (f(z + i * h) - f(z - i * h)) / (2.0 * h);
    (dx + i * dy) * 0.5
}

/// d^2/d(zbar)^2 = (f_xx - f_yy + 2 i f_xy)/4.
fn d_zbar2(f: &impl Fn(C) -> C, z: C, h: f64) -> C {
    let i = C::new(0.0, 1.0);
    let f0 = f(z);
    let fxx = (f(z + h) - f0 * 2.0 + f(z - h)) / (h * h);
    let fyy = (f(z + i * h) - f0 * 2.0 + f(z - i * h)) / (h * h);
    let fxy = (f(z + h + i * h) - f(z + h - i * h) - f(z - h + i * h) + f(z - h - i * h)) / (4.0 * h * h);
    (fxx - fyy + i * fxy * 2.0) * 0.25
}

/// The complex identities are only sampled where `|xi|^2 + |eta|^2` stays below this bound;
/// closer to the chart's pole the difference quotients lose all accuracy.
pub const CHART_BOUND: f64 = 100.0;

/// `(a b + c d, (|a|^2 + |b|^2 + |c|^2 + |d|^2) / 2)`; the second entry bounds the first.
fn bilinear(v: &[C; 4]) -> (C, f64) {
    (v[0] * v[1] + v[2] * v[3], 0.5 * v.iter().map(|c| c.norm_sqr()).sum::<f64>())
}

/// Relative size of a bilinear identity; absolute when the derivatives themselves vanish.
fn relative(pair: (C, f64)) -> f64 {
    pair.0.norm() / pair.1.max(1.0)
}

fn complex_identities(s: &SphereSpec, z: C, h: f64) -> Option<((C, f64), (C, f64))> {
    let (x0, e0) = xi_eta(s, z)?;
    if x0.norm_sqr() + e0.norm_sqr() > CHART_BOUND {
        return None;
    }
    for dz in [C::new(0.0, 0.0), C::new(2.0 * h, 2.0 * h), C::new(-2.0 * h, -2.0 * h), C::new(2.0 * h, -2.0 * h), C::new(-2.0 * h, 2.0 * h)] {
        xi_eta(s, z + dz)?;
    }
    let xi = |w: C| xi_eta(s, w).map(|p| p.0).unwrap_or_default();
    let eta = |w: C| xi_eta(s, w).map(|p| p.1).unwrap_or_default();
    let xib = |w: C| xi(w).conj();
    let etab = |w: C| eta(w).conj();
    let d1 = [d_zbar(&xi, z, h), d_zbar(&xib, z, h), d_zbar(&eta, z, h), d_zbar(&etab, z, h)];
    let d2 = [d_zbar2(&xi, z, h), d_zbar2(&xib, z, h), d_zbar2(&eta, z, h), d_zbar2(&etab, z, h)];
    Some((bilinear(&d1), bilinear(&d2)))
}

/// Conformality and isotropy gaps at `p`, each Richardson-extrapolated from h and 2h.
pub fn conformality_gap(s: &SphereSpec, p: &S2Point, h: f64) -> Result<ConformalityGap, SphereError> {
    s.validate()?;
    check_step(h)?;
    let (theta, phi) = p.angles()?;
    check_pole(theta, h)?;
    let (l1, a1) = angle_gaps(s, theta, phi, h);
    let (l2, a2) = angle_gaps(s, theta, phi, 2.0 * h);
    let rich = |x: f64, y: f64| ((4.0 * x - y) / 3.0).abs();
    let z = stereo2(p.cartesian()?);
    let (conf, iso) = match z.and_then(|z| Some((complex_identities(s, z, h)?, complex_identities(s, z, 2.0 * h)?))) {
        Some(((c1, i1), (c2, i2))) => {
            let rich = |a: (C, f64), b: (C, f64)| relative(((a.0 * 4.0 - b.0) / 3.0, a.1));
            (Some(rich(c1, c2)), Some(rich(i1, i2)))
        }
        None => (None, None),
    };
    Ok(ConformalityGap {
        length_gap: rich(l1, l2),
        angle_gap: rich(a1, a2),
        conf_residual: conf,
        iso_residual: iso,
    })
}

/// Which formula of the positive lift was used.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LiftBranch {
    /// Built from `(conj(xi)_zb, eta_zb)`.
    First,
    /// Built from `(xi_zb, conj(eta)_zb)`.
    Second,
}

/// Twistor lift of a full sphere at one point of the plane chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lift {
    /// Canonical representative in CP^3.
    pub w: [C; 4],
    pub branch: LiftBranch,
    /// `tau(w) = sign * w(z)`: `+` for the positive lift.
    pub sign: Sign,
}

/// Positive twistor lift built from difference quotients of `(xi, eta)` at step h.
pub fn twistor_lift(s: &SphereSpec, z: C, h: f64) -> Result<Lift, SphereError> {
    lift_impl(s, z, h, Sign::Plus)
}

/// Negative twistor lift; projects onto the antipodal sphere.
pub fn twistor_lift_negative(s: &SphereSpec, z: C, h: f64) -> Result<Lift, SphereError> {
    lift_impl(s, z, h, Sign::Minus)
}

fn lift_impl(s: &SphereSpec, z: C, h: f64, sign: Sign) -> Result<Lift, SphereError> {
    if !s.is_linearly_full() {
        return Err(SphereError::NotFull);
    }
    if z.norm() == 0.0 {
        return Err(SphereError::DegenerateJet(z));
    }
    let (xi0, eta0) = xi_eta(s, z).ok_or(SphereError::DegenerateJet(z))?;
    let xi = |w: C| xi_eta(s, w).map(|p| p.0).unwrap_or_default();
    let eta = |w: C| xi_eta(s, w).map(|p| p.1).unwrap_or_default();
    let xib = |w: C| xi(w).conj();
    let etab = |w: C| eta(w).conj();
    let xi_z = d_zbar(&xi, z, h);
    let eta_z = d_zbar(&eta, z, h);
    let xib_z = d_zbar(&xib, z, h);
    let etab_z = d_zbar(&etab, z, h);
    let jet = [xi_z, eta_z, xib_z, etab_z].iter().fold(0.0f64, |m, c| m.max(c.norm()));
    if jet < 1e-12 {
        return Err(SphereError::DegenerateJet(z));
    }
    let (xib0, etab0) = (xi0.conj(), eta0.conj());
    let (w, branch) = match sign {
        Sign::Plus => {
            if xib_z.norm().max(eta_z.norm()) >= xi_z.norm().max(etab_z.norm()) {
                (
                    [xib_z, xib_z * xi0 + eta_z * etab0, xib_z * eta0 - eta_z * xib0, -eta_z],
                    LiftBranch::First,
                )
            } else {
                (
                    [etab_z, etab_z * xi0 - xi_z * etab0, etab_z * eta0 + xi_z * xib0, xi_z],
                    LiftBranch::Second,
                )
            }
        }
        Sign::Minus => {
            if xi_z.norm().max(eta_z.norm()) >= xib_z.norm().max(etab_z.norm()) {
                (
                    [xi_z * xib0 + eta_z * etab0, -xi_z, -eta_z, eta_z * xi0 - xi_z * eta0],
                    LiftBranch::First,
                )
            } else {
                (
                    [xib_z * etab0 - etab_z * xib0, etab_z, -xib_z, xib_z * xi0 + etab_z * eta0],
                    LiftBranch::Second,
                )
            }
        }
    };
    Ok(Lift { w: canonical_cp3(w)?, branch, sign })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_core::SQRT3;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn stereo_examples() {
        let n = stereo2_inv(c(0.0));
        assert_eq!(n, [0.0, 0.0, 1.0]);
        let e = stereo2_inv(c(1.0));
        assert!((e[0] - 1.0).abs() < 1e-15 && e[2].abs() < 1e-15);
        assert_eq!(stereo2_inv(C::new(f64::INFINITY, 0.0)), [0.0, 0.0, -1.0]);
        let z = C::new(0.3, -1.7);
        let back = stereo2(stereo2_inv(z)).unwrap();
        assert!((back - z).norm() < 1e-14);
        let p = stereo4_inv(C::new(0.2, 0.1), C::new(-0.4, 0.3));
        let (xi, eta) = stereo4(&p).unwrap();
        assert!((xi - C::new(0.2, 0.1)).norm() < 1e-15);
        assert!((eta - C::new(-0.4, 0.3)).norm() < 1e-15);
    }

    #[test]
    fn full_sphere_poles_and_equator() {
        let s = SphereSpec::full(C::new(0.7, -1.2), C::new(2.0, 0.4));
        let north = eval_sphere(&s, &S2Point::Homogeneous(c(1.0), c(0.0))).unwrap();
        assert!((north.t - 1.0).abs() < 1e-15);
        let south = eval_sphere(&s, &S2Point::Homogeneous(c(0.0), c(1.0))).unwrap();
        assert!((south.t - 1.0).abs() < 1e-15);
        let h = SphereSpec::full_real(SQRT3, SQRT3);
        let eq = eval_sphere(&h, &S2Point::spherical(PI / 2.0, 0.0)).unwrap();
        // [1,1]: (1 - 4 + 1, 0, 2 sqrt3) / 4.
        assert!((eq.t + 0.5).abs() < 1e-14);
        assert!(eq.zeta1.norm() < 1e-14);
        assert!((eq.zeta2 - c(SQRT3 / 2.0)).norm() < 1e-14);
    }

    #[test]
    fn degenerate_limits_of_full() {
        let s = SphereSpec::full(c(1.0), c(0.0));
        let south = eval_sphere(&s, &S2Point::spherical(PI, 0.0)).unwrap();
        assert!((south.t + 1.0).abs() < 1e-15);
        let s = SphereSpec::full(c(0.0), c(1.5));
        let d = SphereSpec::degenerate(2, c(1.5), Sign::Plus);
        let p = S2Point::spherical(1.1, 0.4);
        let a = eval_sphere(&s, &p).unwrap();
        let b = eval_sphere(&d, &p).unwrap();
        assert!(a.distance(&b) < 1e-15);
    }

    #[test]
    fn twistor_examples() {
        let one = c(1.0);
        let zero = c(0.0);
        assert_eq!(twistor_project(&[one, zero, zero, zero]).unwrap().t, 1.0);
        assert_eq!(twistor_project(&[zero, one, zero, zero]).unwrap().t, -1.0);
        let p = twistor_project(&[one, one, zero, zero]).unwrap();
        assert!(p.t.abs() < 1e-15 && (p.zeta1 - one).norm() < 1e-15);
        assert_eq!(twistor_project(&[zero; 4]), Err(SphereError::ZeroVector));
        let curve = TwistorCurve::new([one, c(SQRT3), c(SQRT3), c(-1.0)]).unwrap();
        let w = twistor_curve_eval(&curve, &S2Point::Homogeneous(one, zero)).unwrap();
        assert!((w[0] - one).norm() < 1e-15);
        let w = twistor_curve_eval(&curve, &S2Point::Homogeneous(zero, one)).unwrap();
        assert!((w[3] - one).norm() < 1e-15);
    }

    #[test]
    fn horizontality_examples() {
        let one = c(1.0);
        let v = TwistorCurve::new([one, c(SQRT3), c(SQRT3), c(-1.0)]).unwrap();
        assert!(horizontality_residual(&v) < 1e-15);
        assert!(horizontality_report(&v).pullback < 1e-8);
        let nh = TwistorCurve::new([one, one, one, c(0.0)]).unwrap();
        assert!((horizontality_residual(&nh) - 1.0 / 3.0).abs() < 1e-15);
        assert!(horizontality_report(&nh).pullback > 1e-3);
    }

    #[test]
    fn pole_guard() {
        let s = SphereSpec::full_real(1.0, 1.0);
        let r = tension_residual(&s, &S2Point::spherical(1e-3, 0.0), 1e-3);
        assert!(matches!(r, Err(SphereError::PoleProximity { .. })));
    }

    #[test]
    fn invalid_specs() {
        assert!(SphereSpec::degenerate(1, c(0.0), Sign::Plus).validate().is_err());
        assert!(SphereSpec::degenerate(3, c(1.0), Sign::Plus).validate().is_err());
        assert!(!SphereSpec::full_real(1.0, 0.0).is_linearly_full());
        assert!(twistor_lift(&SphereSpec::full_real(1.0, 0.0), c(0.5), 1e-4).is_err());
    }
}
