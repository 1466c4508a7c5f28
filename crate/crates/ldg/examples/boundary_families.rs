// The boundary data families side by side: director degree, the two hypotheses the
// topology theorems need, and how the torus and split families concentrate.
//
// `cargo run --release --example boundary_families`

use ldg::boundary_data::{split_mu2, trace_l2_distance, BoundarySpec, BoundaryTrace, Profile};
use ldg::solver::HalfSliceGrid;
use ldg::tensor_core::SplitPoint;
use num_complex::Complex64 as C;
use std::f64::consts::PI;

pub fn families() -> Vec<(&'static str, BoundarySpec)> {
    vec![
        ("uniform", BoundarySpec::director(Profile::Uniform)),
        ("radial (hedgehog)", BoundarySpec::director(Profile::Radial)),
        ("torus j=2", BoundarySpec::torus(2)),
        ("torus j=8", BoundarySpec::torus(8)),
        ("tangent", BoundarySpec::tangent(0.0)),
        ("full (1, 0.05)", BoundarySpec::full_sphere(C::new(1.0, 0.0), C::new(0.05, 0.0))),
        ("full (sqrt3, sqrt3)", BoundarySpec::full_sphere(C::new(3f64.sqrt(), 0.0), C::new(3f64.sqrt(), 0.0))),
    ]
}

/// Fraction of the sphere's area where the trace is not e0.
pub fn active_area(spec: &BoundarySpec, n: usize) -> f64 {
    let e0 = SplitPoint::from_array([1.0, 0.0, 0.0, 0.0, 0.0]);
    let h = PI / n as f64;
    (0..n)
        .map(|k| (k as f64 + 0.5) * h)
        .filter(|&t| spec.eval(t).distance(&e0) > 1e-6)
        .map(|t| 0.5 * t.sin() * h)
        .sum()
}

fn main() {
    let grid = HalfSliceGrid::ball(1.0, 64, 128).unwrap();
    println!("{:<22} {:>7} {:>10} {:>6} {:>6}", "trace", "degree", "beta min", "HP1", "HP3");
    for (name, spec) in families() {
        let t = BoundaryTrace::sample(spec, &grid).unwrap();
        let degree = t.degree.map_or("-".into(), |d| d.to_string());
        println!("{name:<22} {degree:>7} {:>10.4} {:>6} {:>6}", t.beta_min, t.hp1(), t.hp3());
    }

    println!("\ntorus family, area fraction where the trace leaves e0:");
    for j in [1, 2, 4, 8, 16] {
        println!("  j = {j:>2}: {:.4}", active_area(&BoundarySpec::torus(j), 20_000));
    }

    println!("\nsplit family mu2 = 2^-j, L2 distance to the tangent trace:");
    let tangent = BoundarySpec::tangent(0.0);
    for j in 1..=6 {
        let mu2 = split_mu2(j);
        let d = trace_l2_distance(&BoundarySpec::full_sphere(C::new(1.0, 0.0), C::new(mu2, 0.0)), &tangent, 4096);
        println!("  mu2 = {mu2:<8} {d:.4}");
    }
}
