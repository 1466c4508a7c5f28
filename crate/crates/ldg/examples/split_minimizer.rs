// A linearly full boundary sphere with a small second parameter: the minimizer breaks
// into an axis dipole, and the low biaxiality level sets are spheres capped at its ends.
//
// `cargo run --release --example split_minimizer -- 128 0.05`

use ldg::boundary_data::full_sphere_trace;
use ldg::solver::{minimize, HalfSliceGrid, SolverConfig, SolverRun};
use ldg::topology::{classify_run, sign_symbol, AnalysisOptions, ComponentKind, Revolved, TopologyReport};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

pub fn solve(n_r: usize, mu2: f64, levels: &[f64]) -> (SolverRun, TopologyReport) {
    let grid = HalfSliceGrid::ball(1.0, n_r, 2 * n_r).unwrap();
    let trace = full_sphere_trace(C::new(1.0, 0.0), C::new(mu2, 0.0), &grid).unwrap();
    let cfg = SolverConfig { lambda: 5.0, ..Default::default() };
    let run = minimize(&cfg, &grid, &trace).unwrap();
    let opts = AnalysisOptions { levels: levels.to_vec(), ..Default::default() };
    let report = classify_run(&run, &opts).unwrap();
    (run, report)
}

/// Levels whose components include a sphere through two consecutive singularities.
pub fn dipole_sphere_levels(rep: &TopologyReport) -> Vec<f64> {
    rep.levels
        .iter()
        .filter(|l| {
            l.components.iter().any(|c| {
                c.kind == ComponentKind::AxisToAxis
                    && c.revolved == Revolved::TopologicalSphere
                    && c.singularities.len() == 2
                    && c.singularities[1] == c.singularities[0] + 1
            })
        })
        .map(|l| l.t)
        .collect()
}

fn main() {
    let mut args = std::env::args().skip(1);
    let n_r = args.next().and_then(|a| a.parse().ok()).unwrap_or(128);
    let mu2: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.05);
    let levels = [-0.9, -0.7, -0.5, 0.0, 0.5, 0.9];
    let (run, rep) = solve(n_r, mu2, &levels);
    println!("mu2 = {mu2}, grid {n_r} x {}: E = {:.5} x 4pi, {:?}", 2 * n_r, run.energy() / (4.0 * PI), run.status);
    println!("verdict {:?}, boundary beta min {:.3}", rep.verdict, rep.hp1.value);
    for s in &rep.singularities {
        println!("  singularity {} at z = {:+.4}", sign_symbol(s.sign), s.z);
    }
    println!("dipole spheres at beta = {:?}", dipole_sphere_levels(&rep));
    for l in &rep.levels {
        let kinds: Vec<String> = l.components.iter().map(|c| format!("{:?}", c.revolved)).collect();
        println!("  beta = {:+.1}: {}", l.t, kinds.join(", "));
    }
}
