//! Analytic identity suite behind the `verify` command: energy quantization, tension,
//! conformality and isotropy, twistor round-trips, second-variation signs, the biaxiality
//! cone law and the discrete gradient.

use crate::boundary_data::{director_trace, tangent_trace, Profile};
use crate::quadrature::pairwise_sum;
use crate::solver::energy::{ambient_gradient, energy_terms, EnergyModel, Mode, Stencil};
use crate::solver::{homogeneous_extension, EquivariantField, HalfSliceGrid};
use crate::spheres::{
    conformality_gap, energy_density, eval_plane, eval_sphere, horizontality_residual, sphere_energy, tension_residual,
    twistor_curve_eval, twistor_lift, twistor_project, S2Point, SphereSpec, TwistorCurve,
};
use crate::tensor_core::{biaxiality, Sign, SQRT3};
use crate::variation::{hedgehog_destabilizer, omega2_identity_gap, second_variation, stability_battery, Base, TangentMap};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Fast,
    Full,
}

impl FromStr for Level {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            _ => Err(format!("unknown level {s:?}, expected fast or full")),
        }
    }
}

/// Deliberate corruptions used to check that the suite can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Scales the 4 pi energy quantum by 1.01.
    EnergyQuantum,
    /// Flips the sign of the horizontality constraint `mu3 = -mu1 mu2 / 3`.
    TwistorSign,
}

impl FromStr for Mutation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "energy-quantum" => Ok(Mutation::EnergyQuantum),
            "twistor-sign" => Ok(Mutation::TwistorSign),
            _ => Err(format!("unknown mutation {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub level: Level,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Passes when `residual <= tolerance`; an error counts as a failure.
fn bounded(name: &str, tolerance: f64, r: Result<f64, String>) -> Check {
    match r {
        Ok(residual) => Check {
            name: name.into(),
            residual,
            tolerance,
            passed: residual <= tolerance && residual.is_finite(),
            detail: None,
        },
        Err(e) => Check { name: name.into(), residual: f64::NAN, tolerance, passed: false, detail: Some(e) },
    }
}

/// Parameters of one run of the suite.
struct Plan {
    draws: usize,
    points: usize,
    pairs: usize,
    battery: usize,
    destab: (usize, usize),
    quantum: f64,
    mu3_sign: f64,
}

/// The sphere catalog the pointwise residual checks run over.
pub fn catalog() -> Vec<SphereSpec> {
    vec![
        SphereSpec::degenerate(1, C::new(0.7, 0.2), Sign::Plus),
        SphereSpec::degenerate(2, C::new(1.3, 0.0), Sign::Minus),
        SphereSpec::full_real(SQRT3, SQRT3),
        SphereSpec::full_real(1.0, 1.0),
        SphereSpec::full_real(1.0, 2.0),
        SphereSpec::full(C::new(0.5, 0.5), C::new(2.0, -0.3)),
        SphereSpec::EquatorialEmbedding { k: 1 },
        SphereSpec::EquatorialEmbedding { k: 2 },
    ]
}

fn random_mu(rng: &mut ChaCha8Rng) -> C {
    C::from_polar(rng.random_range(0.3..3.0), rng.random_range(0.0..2.0 * PI))
}

/// Relative energy error against `degree` quanta.
fn energy_check(name: &str, plan: &Plan, make: impl Fn(&mut ChaCha8Rng) -> SphereSpec, degree: f64, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs: Vec<SphereSpec> = (0..plan.draws).map(|_| make(&mut rng)).collect();
    let r = specs.iter().try_fold(0.0f64, |worst, s| {
        let e = sphere_energy(s, 256).map_err(|e| e.to_string())?;
        let expect = degree * plan.quantum;
        Ok(worst.max((e - expect).abs() / expect))
    });
    bounded(name, 1e-4, r)
}

fn interior_points(n: usize) -> Vec<S2Point> {
    (0..n)
        .map(|k| {
            let theta = 0.2 + (PI - 0.4) * (k as f64 + 0.5) / n as f64;
            S2Point::spherical(theta, 0.37 * k as f64)
        })
        .collect()
}

fn twistor_identity(plan: &Plan) -> (Check, Check) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut gap = 0.0f64;
    let mut horiz = 0.0f64;
    for _ in 0..plan.pairs {
        let (m1, m2) = (random_mu(&mut rng), random_mu(&mut rng));
        let one = C::new(1.0, 0.0);
        let curve = match TwistorCurve::new([one, m1, m2, plan.mu3_sign * m1 * m2 / 3.0]) {
            Ok(c) => c,
            Err(e) => return (bounded("twistor_identity", 1e-12, Err(e.to_string())), bounded("horizontality", 1e-12, Err(e.to_string()))),
        };
        horiz = horiz.max(horizontality_residual(&curve));
        let spec = SphereSpec::full(m1, m2);
        for _ in 0..plan.points {
            let z = C::from_polar(rng.random_range(0.05..5.0), rng.random_range(0.0..2.0 * PI));
            let p = S2Point::plane(z);
            let a = twistor_curve_eval(&curve, &p).and_then(|w| twistor_project(&w));
            let b = eval_sphere(&spec, &p);
            match (a, b) {
                (Ok(a), Ok(b)) => gap = gap.max(a.distance(&b)),
                (Err(e), _) | (_, Err(e)) => return (bounded("twistor_identity", 1e-12, Err(e.to_string())), bounded("horizontality", 1e-12, Err(e.to_string()))),
            }
        }
    }
    (bounded("twistor_identity", 1e-12, Ok(gap)), bounded("horizontality", 1e-12, Ok(horiz)))
}

fn lift_round_trip() -> Check {
    let r = [SphereSpec::full_real(SQRT3, SQRT3), SphereSpec::full_real(1.0, 1.0)]
        .iter()
        .try_fold(0.0f64, |worst, s| {
            let mut w = worst;
            for k in 0..20 {
                let z = C::from_polar(0.2 + 0.15 * k as f64, 0.9 * k as f64 + 0.1);
                let lift = twistor_lift(s, z, 1e-4).map_err(|e| e.to_string())?;
                let back = twistor_project(&lift.w).map_err(|e| e.to_string())?;
                w = w.max(back.distance(&eval_plane(s, z)));
            }
            Ok(w)
        });
    bounded("lift_round_trip", 1e-4, r)
}

fn pointwise(name: &str, f: impl Fn(&SphereSpec, &S2Point) -> Result<f64, String>) -> Check {
    let pts = interior_points(12);
    let r = catalog().iter().try_fold(0.0f64, |worst, s| {
        pts.iter().try_fold(worst, |w, p| Ok(w.max(f(s, p)?)))
    });
    bounded(name, 1e-5, r)
}

fn hedgehog_check(plan: &Plan) -> Check {
    let (n_r, n_t) = plan.destab;
    let mut values = Vec::new();
    for m in [1, 2] {
        match hedgehog_destabilizer(n_r * m, n_t * m).and_then(|x| second_variation(&Base::Hedgehog, &x)) {
            Ok(v) => values.push(v.value),
            Err(e) => return bounded("hedgehog_instability", 0.0, Err(e.to_string())),
        }
    }
    // Residual is the larger of the two second variations; it must be negative.
    let worst = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Check {
        name: "hedgehog_instability".into(),
        residual: worst,
        tolerance: 0.0,
        passed: worst < 0.0,
        detail: Some(format!("second variation at base and doubled grid: {values:?}")),
    }
}

fn battery_check(plan: &Plan) -> Check {
    let base = Base::Tangent(TangentMap::new(0.0, Sign::Plus));
    let r = stability_battery(&base, 7, plan.battery, 200, 48)
        .map(|v| v.iter().map(|(q, n)| -q / n).fold(f64::NEG_INFINITY, f64::max))
        .map_err(|e| e.to_string());
    bounded("equator_map_nonnegativity", 1e-6, r)
}

fn omega2_check() -> Check {
    let r = [SphereSpec::full_real(SQRT3, SQRT3), SphereSpec::full_real(1.0, 1.0)]
        .iter()
        .try_fold(0.0f64, |w, s| Ok(w.max(omega2_identity_gap(s, 256).map_err(|e| e.to_string())?)));
    bounded("omega2_identity", 1e-5, r)
}

fn constant_density(plan: &Plan) -> Check {
    let s = SphereSpec::full_real(SQRT3, SQRT3);
    let worst = (0..20)
        .map(|k| {
            let theta = 0.05 + (PI - 0.1) * k as f64 / 19.0;
            (energy_density(&s, theta) - 6.0 * plan.quantum / (4.0 * PI)).abs()
        })
        .fold(0.0, f64::max);
    bounded("constant_energy_density", 1e-6, Ok(worst))
}

/// `-cos^3/2 + 3 cos/2` against the biaxiality of the sampled equator map.
pub fn cone_law_residual(angles: usize) -> f64 {
    let tm = TangentMap::new(0.0, Sign::Plus);
    (0..angles)
        .map(|k| {
            let theta = PI * (k as f64 + 0.5) / angles as f64;
            let x = [theta.sin(), 0.0, theta.cos()];
            let q = crate::variation::eval_tangent(&tm, x).expect("unit vector");
            let b = biaxiality(&q).expect("unit norm");
            let c = theta.cos();
            (b - (-0.5 * c * c * c + 1.5 * c)).abs()
        })
        .fold(0.0, f64::max)
}

/// Smooth, clearly non-critical test fields for gradient checks: the extension of `trace`
/// bent by a fixed smooth perturbation, renormalized when `unit`.
pub fn perturbed_extension(grid: &HalfSliceGrid, trace: &crate::boundary_data::BoundaryTrace, unit: bool) -> EquivariantField {
    let mut f = homogeneous_extension(grid, trace);
    for (v, n) in f.values.iter_mut().zip(&grid.nodes) {
        let (r, z) = (n.r, n.z);
        let bump = [0.3 * (3.0 * z).sin(), 0.4 * r * (2.0 * z).cos(), 0.2 * r, 0.3 * r * r, -0.2 * r * r * z];
        v.iter_mut().zip(bump).for_each(|(x, b)| *x += b);
    }
    if unit {
        f.normalize();
    }
    f
}

/// Worst mismatch between the analytic gradient and central differences of the discrete
/// energy along random directions at `nodes` random interior nodes, relative to
/// `|grad_k| |v|`, in three configurations: a unit field at lambda 0, the same at lambda 5
/// (tangent directions), and a non-unit field under the penalty model.
pub fn gradient_check(nodes: usize, seed: u64) -> Result<f64, String> {
    let grid = HalfSliceGrid::ball(1.0, 24, 48).map_err(|e| e.to_string())?;
    let st = Stencil::new(&grid);
    let tangent = tangent_trace(0.0, &grid).map_err(|e| e.to_string())?;
    let torus = director_trace(Profile::Torus, Some(2), &grid).map_err(|e| e.to_string())?;
    let configs = [
        (perturbed_extension(&grid, &tangent, true), EnergyModel::projected(0.0)),
        (perturbed_extension(&grid, &torus, true), EnergyModel::projected(5.0)),
        (perturbed_extension(&grid, &tangent, false), EnergyModel { lambda: 1.0, mode: Mode::GlPenalty { epsilon: 0.3 } }),
    ];
    let interior: Vec<usize> = grid.interior().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for (field, model) in &configs {
        let g = ambient_gradient(field, &grid, &st, model);
        for _ in 0..nodes {
            let k = interior[rng.random_range(0..interior.len())];
            let mut v: [f64; 5] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            if matches!(model.mode, Mode::Projected) {
                let p = field.values[k];
                let d: f64 = (0..5).map(|i| p[i] * v[i]).sum();
                v.iter_mut().zip(p).for_each(|(x, pi)| *x -= d * pi);
            }
            let h = 1e-4;
            let shifted = |s: f64| {
                let mut f = field.clone();
                f.values[k].iter_mut().zip(v).for_each(|(x, vi)| *x += s * vi);
                energy_terms(&f, &grid, &st, model)
            };
            // Differencing term by term keeps roundoff local to the perturbed node.
            let quotient = |h: f64| {
                let (p, m) = (shifted(h), shifted(-h));
                let d: Vec<f64> = p.iter().zip(&m).map(|(a, b)| a - b).collect();
                pairwise_sum(&d) / (2.0 * h)
            };
            let fd = (4.0 * quotient(h) - quotient(2.0 * h)) / 3.0;
            let an: f64 = (0..5).map(|i| g[k][i] * v[i]).sum();
            let gn = g[k].iter().map(|x| x * x).sum::<f64>().sqrt();
            let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            worst = worst.max((fd - an).abs() / (gn * vn).max(1e-12));
        }
    }
    Ok(worst)
}

/// Runs the suite; `mutation` corrupts one internal constant.
pub fn run_suite(level: Level, mutation: Option<Mutation>) -> VerifyReport {
    let full = level == Level::Full;
    let plan = Plan {
        draws: if full { 10 } else { 3 },
        points: if full { 50 } else { 10 },
        pairs: if full { 50 } else { 10 },
        battery: if full { 50 } else { 8 },
        destab: if full { (256, 32) } else { (128, 32) },
        quantum: if mutation == Some(Mutation::EnergyQuantum) { 4.0 * PI * 1.01 } else { 4.0 * PI },
        mu3_sign: if mutation == Some(Mutation::TwistorSign) { 1.0 } else { -1.0 },
    };
    let mut checks = vec![
        energy_check("energy_degenerate_k1", &plan, |r| SphereSpec::degenerate(1, random_mu(r), Sign::Plus), 1.0, 1),
        energy_check("energy_degenerate_k2", &plan, |r| SphereSpec::degenerate(2, random_mu(r), Sign::Minus), 2.0, 2),
        energy_check("energy_full_12pi", &plan, |r| SphereSpec::full(random_mu(r), random_mu(r)), 3.0, 3),
        constant_density(&plan),
    ];
    let (ti, hz) = twistor_identity(&plan);
    checks.push(ti);
    checks.push(hz);
    checks.push(lift_round_trip());
    checks.push(pointwise("tension", |s, p| tension_residual(s, p, 1e-3).map_err(|e| e.to_string())));
    checks.push(pointwise("conformality", |s, p| {
        conformality_gap(s, p, 1e-3).map(|g| g.length_gap.max(g.angle_gap)).map_err(|e| e.to_string())
    }));
    checks.push(pointwise("complex_conformality", |s, p| {
        conformality_gap(s, p, 1e-3).map(|g| g.conf_residual.unwrap_or(0.0)).map_err(|e| e.to_string())
    }));
    checks.push(pointwise("isotropy", |s, p| {
        conformality_gap(s, p, 1e-3).map(|g| g.iso_residual.unwrap_or(0.0)).map_err(|e| e.to_string())
    }));
    checks.push(omega2_check());
    checks.push(hedgehog_check(&plan));
    checks.push(battery_check(&plan));
    checks.push(bounded("beta_cone_law", 1e-6, Ok(cone_law_residual(50))));
    checks.push(bounded("discrete_gradient", 1e-6, gradient_check(if full { 20 } else { 8 }, 5)));
    let passed = checks.iter().all(|c| c.passed);
    VerifyReport { level, passed, checks }
}
