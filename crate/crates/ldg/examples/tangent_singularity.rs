// Minimize with the rotated equator-map trace and look at the point defect it forces:
// the axis singularity, the interior monotonicity quotient and the fitted tangent map.
//
// `cargo run --release --example tangent_singularity -- 128`

use ldg::boundary_data::tangent_trace;
use ldg::solver::diagnostics::{axis_singularities, fit_tangent_map, is_nondecreasing, monotonicity_profile, TangentFit};
use ldg::solver::{minimize, AxisSingularity, HalfSliceGrid, SolverConfig};
use std::f64::consts::PI;

pub struct Defect {
    pub energy_quanta: f64,
    pub iterations: usize,
    pub singularities: Vec<AxisSingularity>,
    /// `(r, E(B_r)/r)` about the singularity.
    pub profile: Vec<(f64, f64)>,
    pub fit: TangentFit,
}

pub fn resolve(n_r: usize, alpha: f64) -> Defect {
    let grid = HalfSliceGrid::ball(1.0, n_r, 2 * n_r).unwrap();
    let trace = tangent_trace(alpha, &grid).unwrap();
    let run = minimize(&SolverConfig::default(), &grid, &trace).unwrap();
    assert!(run.is_converged(), "{:?}", run.status);
    let singularities = axis_singularities(&run.grid, &run.field);
    let s = singularities.first().expect("degree-one data forces a defect");
    let profile = monotonicity_profile(&run, s.z, &[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
    let fit = fit_tangent_map(&run, s, &[0.1, 0.2, 0.3]).unwrap();
    Defect {
        energy_quanta: run.energy() / (4.0 * PI),
        iterations: run.energy_history.len() - 1,
        singularities,
        profile,
        fit,
    }
}

fn main() {
    let n_r = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(128);
    let alpha = 0.6;
    let d = resolve(n_r, alpha);
    println!("grid {n_r} x {}: E = {:.5} x 4pi after {} iterations", 2 * n_r, d.energy_quanta, d.iterations);
    for s in &d.singularities {
        println!("axis singularity at z = {:+.4}, sign {}", s.z, s.sign);
    }
    for (r, q) in &d.profile {
        println!("  E(B_{r:.1})/r = {:.4} x 4pi", q / (4.0 * PI));
    }
    println!("monotone within 2%: {}", is_nondecreasing(&d.profile, 0.02));
    println!("fitted tangent map: sign {}, alpha {:.4} (trace alpha {alpha})", d.fit.sign, d.fit.alpha);
    for a in &d.fit.annuli {
        println!("  annulus {:.1}: alpha {:.4}, rms residual {:.2e}", a.radius, a.alpha, a.residual);
    }
}
