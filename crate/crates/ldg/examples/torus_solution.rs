// Torus-family director data: a smooth minimizer whose negative uniaxial set is a ring
// linked with the axis, and whose biaxial level sets are nested tori.
//
// `cargo run --release --example torus_solution -- 128 8`

use ldg::boundary_data::{director_trace, Profile};
use ldg::solver::{minimize, HalfSliceGrid, SolverConfig, SolverRun};
use ldg::topology::{classify_run, AnalysisOptions, Revolved, TopologyReport};
use std::f64::consts::PI;

pub fn solve(n_r: usize, j: u32) -> (SolverRun, TopologyReport) {
    let grid = HalfSliceGrid::ball(1.0, n_r, 2 * n_r).unwrap();
    let trace = director_trace(Profile::Torus, Some(j), &grid).unwrap();
    let cfg = SolverConfig { lambda: 5.0, ..Default::default() };
    let run = minimize(&cfg, &grid, &trace).unwrap();
    // Coarse grids smear the ring minimum; widen the acceptance band accordingly.
    let opts = AnalysisOptions { ring_tol: 0.1, ..Default::default() };
    let report = classify_run(&run, &opts).unwrap();
    (run, report)
}

fn main() {
    let mut args = std::env::args().skip(1);
    let n_r = args.next().and_then(|a| a.parse().ok()).unwrap_or(128);
    let j = args.next().and_then(|a| a.parse().ok()).unwrap_or(8);
    let (run, rep) = solve(n_r, j);
    println!("j = {j}, grid {n_r} x {}: E = {:.5} x 4pi, {:?}", 2 * n_r, run.energy() / (4.0 * PI), run.status);
    println!("verdict {:?}; {} axis singularities", rep.verdict, rep.singularities.len());
    match rep.ring {
        Some(r) => println!("ring at r = {:.4}, z = {:+.4}, beta = {:.4}; linked with the axis: {}", r.r, r.z, r.beta, rep.linking),
        None => println!("no ring below the tolerance"),
    }
    if !rep.extra_minima.is_empty() {
        println!("other local minima below -0.9: {}", rep.extra_minima.len());
    }
    for l in &rep.levels {
        println!("  beta = {:+.1}: {} tori, {} other components", l.t, l.count(Revolved::Torus), l.components.len() - l.count(Revolved::Torus));
    }
}
