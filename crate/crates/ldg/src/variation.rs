//! Tangent maps, the constant-norm hedgehog and the second variation of the Dirichlet
//! energy at 0-homogeneous equivariant harmonic maps.
//!
//! Integrals over R^3 of equivariant quantities reduce to `2 pi int int (..) r^2 sin(theta)`
//! on an (r, theta) grid: trapezoid in r, Gauss-Legendre in theta.

use crate::quadrature::{pairwise_sum, refine_until, Rule};
use crate::spheres::{energy_density, eval_angles, SphereError, SphereSpec};
use crate::tensor_core::{join_iota, uniaxial_unchecked, QTensor, Sign, SplitPoint, SQRT3};
use num_complex::Complex64 as C;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationError {
    #[error("tangent maps are not defined at the origin")]
    OriginEvaluation,
    #[error("test field is nonzero ({0:e}) on the outer radius of its quadrature grid")]
    SupportOverflow(f64),
    #[error("grid resolution {0} below the minimum of 32")]
    Resolution(usize),
    #[error(transparent)]
    Sphere(#[from] SphereError),
}

/// `sign * Q^(alpha)`, the rotated equator-map tangent map.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentMap {
    pub alpha: f64,
    pub sign: Sign,
}

impl TangentMap {
    pub fn new(alpha: f64, sign: Sign) -> Self {
        Self { alpha, sign }
    }

    /// Split form at a unit vector.
    pub fn split_at(&self, x: [f64; 3]) -> SplitPoint {
        let s = self.sign.value();
        let w = C::new(x[0], x[1]) * C::from_polar(1.0, self.alpha);
        SplitPoint::new(s * x[2], w * s, C::new(0.0, 0.0))
    }
}

fn unit(x: [f64; 3]) -> Result<[f64; 3], VariationError> {
    let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if n == 0.0 || !n.is_finite() {
        return Err(VariationError::OriginEvaluation);
    }
    Ok(x.map(|v| v / n))
}

pub fn eval_tangent(tm: &TangentMap, x: [f64; 3]) -> Result<QTensor, VariationError> {
    Ok(join_iota(&tm.split_at(unit(x)?)))
}

/// The constant-norm hedgehog: the uniaxial lift of the radial director.
pub fn eval_hedgehog(x: [f64; 3]) -> Result<QTensor, VariationError> {
    Ok(uniaxial_unchecked(unit(x)?))
}

/// The 0-homogeneous harmonic map at which the second variation is taken.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Base {
    Tangent(TangentMap),
    Hedgehog,
    /// Homogeneous extension of any catalog sphere.
    Sphere(SphereSpec),
}

impl Base {
    pub fn sphere(&self) -> SphereSpec {
        match *self {
            Base::Tangent(tm) => SphereSpec::degenerate(1, C::from_polar(1.0, tm.alpha), tm.sign),
            Base::Hedgehog => SphereSpec::full_real(SQRT3, SQRT3),
            Base::Sphere(s) => s,
        }
    }
}

/// Tensor (r, theta) grid: `n_r + 1` trapezoid nodes on [0, rho], `n_theta` Gauss nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadGrid {
    pub rho: f64,
    pub r: Vec<f64>,
    pub r_weights: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_weights: Vec<f64>,
}

impl QuadGrid {
    pub fn new(rho: f64, n_r: usize, n_theta: usize) -> Self {
        let dr = rho / n_r as f64;
        let r: Vec<f64> = (0..=n_r).map(|i| i as f64 * dr).collect();
        let r_weights = (0..=n_r)
            .map(|i| if i == 0 || i == n_r { 0.5 * dr } else { dr })
            .collect();
        let rule = Rule::on(n_theta, 0.0, PI);
        Self { rho, r, r_weights, theta: rule.nodes, theta_weights: rule.weights }
    }

    pub fn n_r(&self) -> usize {
        self.r.len() - 1
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }
}

/// One sample of an equivariant field: value and first derivatives at azimuth 0.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub x: SplitPoint,
    pub dr: SplitPoint,
    pub dtheta: SplitPoint,
}

/// Equivariant vector field `(X0, X1 e^{i phi}, X2 e^{2 i phi})` sampled on a [`QuadGrid`].
#[derive(Clone, Debug)]
pub struct TestField {
    pub grid: QuadGrid,
    /// Row-major, r outer: `jets[i * n_theta + j]`.
    pub jets: Vec<Jet>,
    /// Declared support radius.
    pub support: f64,
}

impl TestField {
    /// Samples a field given together with its derivatives.
    pub fn from_jets(grid: QuadGrid, support: f64, f: impl Fn(f64, f64) -> Jet + Sync) -> Self {
        let nt = grid.n_theta();
        let jets = (0..grid.r.len() * nt)
            .into_par_iter()
            .map(|k| f(grid.r[k / nt], grid.theta[k % nt]))
            .collect();
        Self { grid, jets, support }
    }

    /// Samples a field and differentiates it with 5-point stencils (h = 1e-4).
    pub fn from_fn(grid: QuadGrid, support: f64, f: impl Fn(f64, f64) -> SplitPoint + Sync) -> Self {
        let h = 1e-4;
        let d5 = |g: &dyn Fn(f64) -> SplitPoint, t: f64| {
            (g(t - 2.0 * h) - 8.0 * g(t - h) + 8.0 * g(t + h) - g(t + 2.0 * h)).scale(1.0 / (12.0 * h))
        };
        Self::from_jets(grid, support, |r, t| Jet {
            x: f(r, t),
            dr: d5(&|s| f(s, t), r),
            dtheta: d5(&|s| f(r, s), t),
        })
    }

    pub fn jet(&self, i: usize, j: usize) -> &Jet {
        &self.jets[i * self.grid.n_theta() + j]
    }

    /// `int |X|^2 dx`.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.integrate(|_, _, j| j.x.norm_sqr())
    }

    /// `2 pi int int f(r, j, jet) r^2 sin(theta_j)` where `j` indexes the theta nodes.
    fn integrate(&self, f: impl Fn(f64, usize, &Jet) -> f64 + Sync) -> f64 {
        let g = &self.grid;
        let nt = g.n_theta();
        let rows: Vec<f64> = (0..g.r.len())
            .into_par_iter()
            .map(|i| {
                let r = g.r[i];
                let terms: Vec<f64> = (0..nt)
                    .map(|j| {
                        let t = g.theta[j];
                        g.theta_weights[j] * t.sin() * r * r * f(r, j, &self.jets[i * nt + j])
                    })
                    .collect();
                g.r_weights[i] * pairwise_sum(&terms)
            })
            .collect();
        2.0 * PI * pairwise_sum(&rows)
    }

    /// Largest |X| on the outer radius.
    pub fn boundary_max(&self) -> f64 {
        let i = self.grid.n_r();
        (0..self.grid.n_theta()).map(|j| self.jet(i, j).x.norm()).fold(0.0, f64::max)
    }
}

/// Both forms of the second variation and their difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondVariation {
    /// `int |grad X_T|^2 - |grad w|^2 |X_T|^2`.
    pub value: f64,
    /// The expanded form in terms of X and `w . X`.
    pub first_form: f64,
    pub discrepancy: f64,
}

/// Base profile at one latitude: value and theta-derivative at azimuth 0.
#[derive(Clone, Copy, Debug)]
struct Profile {
    w: SplitPoint,
    dw: SplitPoint,
    /// `r^2 |grad w|^2`.
    grad2: f64,
}

fn profile(s: &SphereSpec, theta: f64) -> Profile {
    let h = 1e-3;
    let f = |t: f64| eval_angles(s, t, 0.0);
    let dw = (f(theta - 2.0 * h) - 8.0 * f(theta - h) + 8.0 * f(theta + h) - f(theta + 2.0 * h))
        .scale(1.0 / (12.0 * h));
    let w = f(theta);
    let st = theta.sin();
    let grad2 = dw.norm_sqr() + (w.zeta1.norm_sqr() + 4.0 * w.zeta2.norm_sqr()) / (st * st);
    Profile { w, dw, grad2 }
}

/// `|d_phi A|^2 = |A1|^2 + 4|A2|^2` for an equivariant field at azimuth 0.
fn phi_sqr(a: &SplitPoint) -> f64 {
    a.zeta1.norm_sqr() + 4.0 * a.zeta2.norm_sqr()
}

/// `d_phi A . d_phi B`.
fn phi_dot(a: &SplitPoint, b: &SplitPoint) -> f64 {
    (a.zeta1.conj() * b.zeta1).re + 4.0 * (a.zeta2.conj() * b.zeta2).re
}

pub fn second_variation(base: &Base, x: &TestField) -> Result<SecondVariation, VariationError> {
    let overflow = x.boundary_max();
    if overflow > 1e-12 || x.support > x.grid.rho {
        return Err(VariationError::SupportOverflow(overflow.max(x.support - x.grid.rho)));
    }
    let spec = base.sphere();
    let profiles: Vec<Profile> = x.grid.theta.iter().map(|&t| profile(&spec, t)).collect();
    let second = x.integrate(|r, j, jet| {
        if r == 0.0 {
            return 0.0;
        }
        let p = &profiles[j];
        let st = x.grid.theta[j].sin();
        let a = p.w.dot(&jet.x);
        let xt = jet.x - a * p.w;
        let da_r = p.w.dot(&jet.dr);
        let da_t = p.w.dot(&jet.dtheta) + p.dw.dot(&jet.x);
        let dxt_r = jet.dr - da_r * p.w;
        let dxt_t = jet.dtheta - da_t * p.w - a * p.dw;
        let grad = dxt_r.norm_sqr() + (dxt_t.norm_sqr() + phi_sqr(&xt) / (st * st)) / (r * r);
        grad - p.grad2 / (r * r) * xt.norm_sqr()
    });
    let first = x.integrate(|r, j, jet| {
        if r == 0.0 {
            return 0.0;
        }
        let p = &profiles[j];
        let st = x.grid.theta[j].sin();
        let a = p.w.dot(&jet.x);
        let da_r = p.w.dot(&jet.dr);
        let da_t = p.w.dot(&jet.dtheta) + p.dw.dot(&jet.x);
        let grad_x = jet.dr.norm_sqr() + (jet.dtheta.norm_sqr() + phi_sqr(&jet.x) / (st * st)) / (r * r);
        let grad_w = p.grad2 / (r * r);
        let grad_a = da_r * da_r + da_t * da_t / (r * r);
        let cross = (jet.dtheta.dot(&p.dw) + phi_dot(&jet.x, &p.w) / (st * st)) / (r * r);
        grad_x + (4.0 * a * a - jet.x.norm_sqr()) * grad_w - grad_a - 4.0 * a * cross
    });
    Ok(SecondVariation { value: second, first_form: first, discrepancy: (second - first).abs() })
}

/// C1 cubic step: 0 for t <= 0, 1 for t >= 1.
fn smoothstep(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0)
    } else {
        (t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t))
    }
}

/// Inner cutoff radius of the destabilizer profile.
pub const DESTAB_R0: f64 = 0.05;
/// Width of the outer cutoff of the destabilizer profile (support ends at r = 1).
pub const DESTAB_DELTA: f64 = 0.5;

/// Radial profile `r^{-1/2}` (the Hardy extremal) with C1 cubic cutoffs on [r0/2, r0] and
/// [1 - delta, 1]; returns (value, derivative).
pub fn destabilizer_radial(r: f64) -> (f64, f64) {
    let (r0, delta) = (DESTAB_R0, DESTAB_DELTA);
    if r <= 0.5 * r0 || r >= 1.0 {
        return (0.0, 0.0);
    }
    let (a, da) = smoothstep((r - 0.5 * r0) / (0.5 * r0));
    let (b, db) = smoothstep((1.0 - r) / delta);
    let s = 1.0 / r.sqrt();
    let ds = -0.5 * s / r;
    let v = s * a * b;
    let dv = ds * a * b + s * da / (0.5 * r0) * b - s * a * db / delta;
    (v, dv)
}

/// `X = (0, i phi(r) g(theta), 0)` with `g = (sqrt3/2) sin^2` on the unit ball, `phi` from
/// [`destabilizer_radial`].
pub fn hedgehog_destabilizer(n_r: usize, n_theta: usize) -> Result<TestField, VariationError> {
    for n in [n_r, n_theta] {
        if n < 32 {
            return Err(VariationError::Resolution(n));
        }
    }
    let grid = QuadGrid::new(1.0, n_r, n_theta);
    let zero = C::new(0.0, 0.0);
    Ok(TestField::from_jets(grid, 1.0, |r, t| {
        let (p, dp) = destabilizer_radial(r);
        let (s, c) = t.sin_cos();
        let g = 0.5 * SQRT3 * s * s;
        let dg = SQRT3 * s * c;
        let lift = |v: f64| SplitPoint::new(0.0, C::new(0.0, v), zero);
        Jet { x: lift(p * g), dr: lift(dp * g), dtheta: lift(p * dg) }
    }))
}

/// Smooth bump `exp(1 - 1/(1 - s^2))` on [a, b]; returns (value, derivative).
fn bump(r: f64, a: f64, b: f64) -> (f64, f64) {
    if r <= a || r >= b {
        return (0.0, 0.0);
    }
    let half = 0.5 * (b - a);
    let s = (r - 0.5 * (a + b)) / half;
    let q = 1.0 - s * s;
    let v = (1.0 - 1.0 / q).exp();
    let dv = v * (-2.0 * s / (q * q)) / half;
    (v, dv)
}

/// A random smooth equivariant field supported in an annulus inside [0, rho):
/// `X0 = c sum a_m cos(m t)`, `X1 = c sum b_m sin(m t)`, `X2 = c sin(t) sum d_m sin(m t)`.
pub fn random_test_field(rng: &mut impl Rng, rho: f64, n_r: usize, n_theta: usize) -> TestField {
    const MODES: usize = 4;
    let a_lo = rng.random_range(0.05..0.4) * rho;
    let a_hi = a_lo + rng.random_range(0.2..0.5) * rho;
    let b_hi = a_hi.min(0.95 * rho);
    let mut coef = |_: usize| -> [C; MODES] {
        std::array::from_fn(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    };
    let a0 = coef(0).map(|c| c.re);
    let b1 = coef(1);
    let d2 = coef(2);
    let grid = QuadGrid::new(rho, n_r, n_theta);
    TestField::from_jets(grid, b_hi, move |r, t| {
        let (c, dc) = bump(r, a_lo, b_hi);
        let (mut x0, mut dx0) = (0.0, 0.0);
        let (mut x1, mut dx1) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
        let (mut x2, mut dx2) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
        let (st, ct) = t.sin_cos();
        for m in 0..MODES {
            let mf = m as f64 + 1.0;
            let (sm, cm) = (mf * t).sin_cos();
            x0 += a0[m] * cm;
            dx0 -= a0[m] * mf * sm;
            x1 += b1[m] * sm;
            dx1 += b1[m] * mf * cm;
            x2 += d2[m] * st * sm;
            dx2 += d2[m] * (ct * sm + st * mf * cm);
        }
        let val = SplitPoint::new(x0, x1, x2);
        let dt = SplitPoint::new(dx0, dx1, dx2);
        Jet { x: val.scale(c), dr: val.scale(dc), dtheta: dt.scale(c) }
    })
}

/// Second variation at `base` over a seeded battery of random fields; returns
/// `(value, |X|^2)` per field in draw order.
pub fn stability_battery(base: &Base, seed: u64, count: usize, n_r: usize, n_theta: usize) -> Result<Vec<(f64, f64)>, VariationError> {
    use rand::SeedableRng;
    let fields: Vec<TestField> = {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| random_test_field(&mut rng, 1.0, n_r, n_theta)).collect()
    };
    fields
        .par_iter()
        .map(|x| Ok((second_variation(base, x)?.value, x.l2_norm_sqr())))
        .collect()
}

/// The two sides of the stability inequality for a latitude profile `g` vanishing at the poles:
/// `(int g^2 |grad w|^2, int g^2/4 + g'^2 + g^2/sin^2)`.
pub fn stability_sides(s: &SphereSpec, g: impl Fn(f64) -> (f64, f64)) -> Result<(f64, f64), VariationError> {
    let lhs = refine_until(|t| 2.0 * PI * t.sin() * g(t).0.powi(2) * energy_density(s, t), 0.0, PI, 128, 1e-10);
    let rhs = refine_until(
        |t| {
            let (v, dv) = g(t);
            let st = t.sin();
            2.0 * PI * st * (0.25 * v * v + dv * dv + v * v / (st * st))
        },
        0.0,
        PI,
        128,
        1e-10,
    );
    for r in [lhs, rhs] {
        if r.rel_change > 1e-6 {
            return Err(SphereError::QuadratureUnderResolved { rel_change: r.rel_change }.into());
        }
    }
    Ok((lhs.value, rhs.value))
}

/// Relative gap of `int w2^2 |grad w|^2 = int |w2'|^2 + 4 w2^2 / sin^2` for real parameters.
pub fn omega2_identity_gap(s: &SphereSpec, n_quad: usize) -> Result<f64, VariationError> {
    s.validate()?;
    let real = |c: C| c.im == 0.0 && c.re >= 0.0;
    match *s {
        SphereSpec::Full { mu1, mu2 } if real(mu1) && real(mu2) => {}
        SphereSpec::Degenerate { mu, .. } if real(mu) => {}
        _ => return Err(SphereError::InvalidSpec("identity needs real nonnegative parameters".into()).into()),
    }
    let n_quad = n_quad.max(64);
    let w2 = |t: f64| eval_angles(s, t, 0.0).zeta2.re;
    let h = 1e-3;
    let dw2 = |t: f64| (w2(t - 2.0 * h) - 8.0 * w2(t - h) + 8.0 * w2(t + h) - w2(t + 2.0 * h)) / (12.0 * h);
    let lhs = refine_until(|t| 2.0 * PI * t.sin() * w2(t).powi(2) * energy_density(s, t), 0.0, PI, n_quad, 1e-9);
    let rhs = refine_until(
        |t| {
            let st = t.sin();
            2.0 * PI * st * (dw2(t).powi(2) + 4.0 * w2(t).powi(2) / (st * st))
        },
        0.0,
        PI,
        n_quad,
        1e-9,
    );
    for r in [lhs, rhs] {
        if r.rel_change > 1e-6 {
            return Err(SphereError::QuadratureUnderResolved { rel_change: r.rel_change }.into());
        }
    }
    let scale = lhs.value.abs().max(rhs.value.abs());
    if scale < 1e-300 {
        return Ok(0.0);
    }
    Ok((lhs.value - rhs.value).abs() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_core::{biaxiality, rotate};

    #[test]
    fn tangent_examples() {
        let tm = TangentMap::new(0.0, Sign::Plus);
        let q = eval_tangent(&tm, [0.0, 0.0, 1.0]).unwrap();
        assert!((q - QTensor::e0()).norm() < 1e-15);
        let q = eval_tangent(&tm, [0.0, 0.0, -2.0]).unwrap();
        assert!((q + QTensor::e0()).norm() < 1e-15);
        let q = eval_tangent(&tm, [3.0, 0.0, 0.0]).unwrap();
        assert!((q - QTensor::basis(1)).norm() < 1e-15);
        assert_eq!(eval_tangent(&tm, [0.0; 3]), Err(VariationError::OriginEvaluation));
    }

    #[test]
    fn tangent_matrix_form() {
        // Entry-by-entry matrix of the alpha = 0 map, rotated.
        let x = [0.3, -0.4, 0.5];
        let n = (0.5f64).sqrt();
        let k = 1.0 / (6f64.sqrt() * n);
        let s3 = SQRT3;
        let m = [
            [-x[2] * k, 0.0, s3 * x[0] * k],
            [0.0, -x[2] * k, s3 * x[1] * k],
            [s3 * x[0] * k, s3 * x[1] * k, 2.0 * x[2] * k],
        ];
        let alpha = 0.7;
        let expect = rotate(&QTensor::from_matrix(&m), alpha);
        let got = eval_tangent(&TangentMap::new(alpha, Sign::Plus), x).unwrap();
        assert!((got - expect).norm() < 1e-14);
    }

    #[test]
    fn hedgehog_is_uniaxial() {
        let q = eval_hedgehog([0.2, 0.9, -0.3]).unwrap();
        assert!((biaxiality(&q).unwrap() - 1.0).abs() < 1e-12);
        assert!((q.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn destabilizer_is_normal_free() {
        let x = hedgehog_destabilizer(32, 32).unwrap();
        let s = Base::Hedgehog.sphere();
        for (k, jet) in x.jets.iter().enumerate() {
            let t = x.grid.theta[k % x.grid.n_theta()];
            assert!(eval_angles(&s, t, 0.0).dot(&jet.x).abs() < 1e-14);
        }
        assert!(hedgehog_destabilizer(16, 64).is_err());
    }

    #[test]
    fn normal_field_has_zero_second_variation() {
        let base = Base::Tangent(TangentMap::new(0.4, Sign::Plus));
        let s = base.sphere();
        let grid = QuadGrid::new(1.0, 200, 48);
        let x = TestField::from_jets(grid, 0.9, |r, t| {
            let (c, dc) = bump(r, 0.2, 0.9);
            let w = eval_angles(&s, t, 0.0);
            let h = 1e-4;
            let dw = (eval_angles(&s, t + h, 0.0) - eval_angles(&s, t - h, 0.0)).scale(0.5 / h);
            Jet { x: w.scale(c), dr: w.scale(dc), dtheta: dw.scale(c) }
        });
        let v = second_variation(&base, &x).unwrap();
        assert!(v.value.abs() < 1e-9, "{v:?}");
    }

    #[test]
    fn support_overflow_detected() {
        let grid = QuadGrid::new(0.5, 64, 32);
        let x = TestField::from_fn(grid, 0.5, |r, _| SplitPoint::new(r, C::new(0.0, 0.0), C::new(0.0, 0.0)));
        assert!(matches!(
            second_variation(&Base::Hedgehog, &x),
            Err(VariationError::SupportOverflow(_))
        ));
    }

    #[test]
    fn omega2_gap_degenerate_is_zero() {
        let s = SphereSpec::degenerate(1, C::new(1.0, 0.0), Sign::Plus);
        assert_eq!(omega2_identity_gap(&s, 64).unwrap(), 0.0);
    }
}
