// Tour of the equivariant harmonic sphere catalog: energies, the twistor picture and
// the pointwise identities.
//
// `cargo run --release --example harmonic_spheres`

use ldg::spheres::{
    conformality_gap, energy_density, eval_plane, eval_sphere, sphere_energy, tension_residual, twistor_curve_eval, twistor_lift,
    twistor_project, S2Point, SphereSpec, TwistorCurve,
};
use ldg::tensor_core::{biaxiality, join_iota, Sign, SQRT3};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

pub struct SphereRow {
    pub spec: SphereSpec,
    /// Energy in units of 4 pi.
    pub quanta: f64,
    pub tension: f64,
    pub conformality: f64,
}

pub fn catalog() -> Vec<SphereSpec> {
    vec![
        SphereSpec::degenerate(1, C::new(0.7, 0.2), Sign::Plus),
        SphereSpec::degenerate(1, C::new(1.0, 0.0), Sign::Minus),
        SphereSpec::degenerate(2, C::new(1.3, 0.0), Sign::Minus),
        SphereSpec::full_real(1.0, 1.0),
        SphereSpec::full_real(SQRT3, SQRT3),
        SphereSpec::full(C::new(0.5, 0.5), C::new(2.0, -0.3)),
    ]
}

pub fn survey(n_quad: usize) -> Vec<SphereRow> {
    let probes = [S2Point::spherical(PI / 3.0, 0.4), S2Point::spherical(PI / 2.0, 2.0), S2Point::spherical(2.0, -1.0)];
    catalog()
        .into_iter()
        .map(|spec| {
            let energy = sphere_energy(&spec, n_quad).expect("catalog energies resolve");
            let mut tension = 0.0f64;
            let mut conformality = 0.0f64;
            for p in &probes {
                tension = tension.max(tension_residual(&spec, p, 1e-3).unwrap());
                conformality = conformality.max(conformality_gap(&spec, p, 1e-3).unwrap().max());
            }
            SphereRow { spec, quanta: energy / (4.0 * PI), tension, conformality }
        })
        .collect()
}

/// Largest distance between `tau o Phi` and the full sphere over a latitude sweep.
pub fn twistor_gap(mu1: C, mu2: C, samples: usize) -> f64 {
    let curve = TwistorCurve::horizontal(mu1, mu2).unwrap();
    let spec = SphereSpec::full(mu1, mu2);
    (0..samples)
        .map(|k| {
            let p = S2Point::spherical(PI * (k as f64 + 0.5) / samples as f64, 0.3 * k as f64);
            let via = twistor_project(&twistor_curve_eval(&curve, &p).unwrap()).unwrap();
            via.distance(&eval_sphere(&spec, &p).unwrap())
        })
        .fold(0.0, f64::max)
}

pub fn label(s: &SphereSpec) -> String {
    let c = |z: C| format!("{:.3}{:+.3}i", z.re, z.im);
    match *s {
        SphereSpec::Degenerate { k, mu, sign } => format!("degenerate k={k} mu={} {sign}", c(mu)),
        SphereSpec::Full { mu1, mu2 } => format!("full mu1={} mu2={}", c(mu1), c(mu2)),
        SphereSpec::EquatorialEmbedding { k } => format!("equatorial slot {k}"),
    }
}

fn main() {
    println!("{:<40} {:>8} {:>10} {:>10}", "sphere", "E/4pi", "tension", "conf.");
    for row in survey(256) {
        println!("{:<40} {:>8.5} {:>10.2e} {:>10.2e}", label(&row.spec), row.quanta, row.tension, row.conformality);
    }

    // The hedgehog sphere has constant energy density 6 and is uniaxial everywhere.
    let hedgehog = SphereSpec::full_real(SQRT3, SQRT3);
    let densities: Vec<String> = [0.3, 1.0, 2.0, 3.0].iter().map(|&t| format!("{:.6}", energy_density(&hedgehog, t))).collect();
    let w = eval_sphere(&hedgehog, &S2Point::spherical(1.1, 0.7)).unwrap();
    println!("\nhedgehog: density {}, beta {:.12}", densities.join(" "), biaxiality(&join_iota(&w)).unwrap());

    println!("twistor composition gap for (0.5+0.5i, 2-0.3i): {:.2e}", twistor_gap(C::new(0.5, 0.5), C::new(2.0, -0.3), 200));

    let full = SphereSpec::full_real(1.0, 2.0);
    let z = C::new(0.4, -0.2);
    let lift = twistor_lift(&full, z, 1e-3).unwrap();
    let back = twistor_project(&lift.w).unwrap();
    println!("positive lift of {} at z = 0.4-0.2i ({:?} branch) projects back within {:.2e}", label(&full), lift.branch, back.distance(&eval_plane(&full, z)));
}
