//! Every example, compiled in and run at a small size.

#[allow(dead_code)]
mod harmonic_spheres {
    include!("../examples/harmonic_spheres.rs");
}
#[allow(dead_code)]
mod hedgehog_instability {
    include!("../examples/hedgehog_instability.rs");
}
#[allow(dead_code)]
mod tangent_singularity {
    include!("../examples/tangent_singularity.rs");
}
#[allow(dead_code)]
mod torus_solution {
    include!("../examples/torus_solution.rs");
}
#[allow(dead_code)]
mod split_minimizer {
    include!("../examples/split_minimizer.rs");
}
#[allow(dead_code)]
mod parameter_sweep {
    include!("../examples/parameter_sweep.rs");
}
#[allow(dead_code)]
mod boundary_families {
    include!("../examples/boundary_families.rs");
}
#[allow(dead_code)]
mod run_files {
    include!("../examples/run_files.rs");
}

use ldg::tensor_core::Sign;
use ldg::topology::Verdict;

#[test]
fn harmonic_spheres_are_quantized() {
    for row in harmonic_spheres::survey(128) {
        assert!((row.quanta - row.quanta.round()).abs() < 1e-4, "{}", harmonic_spheres::label(&row.spec));
        assert!(row.tension < 1e-6 && row.conformality < 1e-6);
    }
    assert!(harmonic_spheres::twistor_gap(num_complex::Complex64::new(0.5, 0.5), num_complex::Complex64::new(2.0, -0.3), 50) < 1e-12);
}

#[test]
fn hedgehog_is_unstable() {
    let o = hedgehog_instability::study(200, 48, 8);
    assert!(o.hedgehog.iter().all(|&(_, v)| v < 0.0), "{:?}", o.hedgehog);
    assert!(o.sides.0 > o.sides.1);
    assert!(o.equator_min_ratio >= 0.0);
}

#[test]
fn tangent_defect_at_small_size() {
    let d = tangent_singularity::resolve(32, 0.6);
    assert_eq!(d.singularities.len(), 1);
    assert_eq!(d.singularities[0].sign, Sign::Plus);
    assert!((d.fit.alpha - 0.6).abs() < 1e-2, "{}", d.fit.alpha);
    assert!((0.9..1.1).contains(&d.energy_quanta), "{}", d.energy_quanta);
}

#[test]
fn coarse_torus_with_j_2() {
    let (run, rep) = torus_solution::solve(32, 2);
    assert!(run.is_converged());
    assert_eq!(rep.verdict, Verdict::TorusSolution);
    assert!(rep.linking && rep.singularities.is_empty());
}

#[test]
fn coarse_split_minimizer() {
    let (_, rep) = split_minimizer::solve(32, 0.05, &[-0.9, -0.5, 0.0]);
    assert_eq!(rep.verdict, Verdict::SplitMinimizer);
    assert_eq!(split_minimizer::dipole_sphere_levels(&rep), vec![-0.9, -0.5]);
}

#[test]
fn coarse_mu2_sweep_switches_to_split() {
    let tmp = tempfile::tempdir().unwrap();
    let rows = parameter_sweep::sweep_mu2(24, &[0.4, 0.05], tmp.path());
    assert_eq!(rows.len(), 2);
    assert_eq!(parameter_sweep::first_split(&rows), Some(0.05));
    assert!(tmp.path().join("sweep.csv").is_file());
}

#[test]
fn boundary_family_table() {
    let fams = boundary_families::families();
    assert_eq!(fams.len(), 7);
    let a2 = boundary_families::active_area(&ldg::boundary_data::BoundarySpec::torus(2), 4000);
    let a8 = boundary_families::active_area(&ldg::boundary_data::BoundarySpec::torus(8), 4000);
    assert!(a2 > a8 && a8 > 0.0);
}

#[test]
fn run_files_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let s = run_files::session(24, tmp.path());
    assert!(s.first.converged && s.restart.converged);
    // A larger potential weight can only raise the minimum.
    assert!(s.restart.energy >= s.first.energy);
    assert_eq!(s.first.config_echo.solver.lambda, 2.0);
}
