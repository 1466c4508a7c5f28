use ldg::boundary_data::{director_trace, tangent_trace, BoundaryTrace, Profile};
use ldg::solver::diagnostics::interior_norm_defect;
use ldg::solver::{
    discrete_energy, minimize, Direction, EquivariantField, HalfSliceGrid, Init, Mode, RunStatus, SolverConfig,
    SolverRun, StepRule,
};
use ldg::tensor_core::Sign;
use ldg::variation::TangentMap;
use ldg::verify::{gradient_check, perturbed_extension};
use proptest::prelude::*;
use std::f64::consts::PI;

fn small_grid() -> HalfSliceGrid {
    HalfSliceGrid::ball(1.0, 20, 40).unwrap()
}

fn sampled_q0(grid: &HalfSliceGrid) -> EquivariantField {
    let tm = TangentMap::new(0.0, Sign::Plus);
    EquivariantField::from_fn(grid, |r, z| {
        let d = (r * r + z * z).sqrt();
        tm.split_at([r / d, 0.0, z / d])
    })
}

fn run(cfg: &SolverConfig, grid: &HalfSliceGrid, trace: &BoundaryTrace) -> SolverRun {
    minimize(cfg, grid, trace).unwrap()
}

fn assert_descent(r: &SolverRun) {
    for (k, w) in r.energy_history.windows(2).enumerate() {
        assert!(w[1] <= w[0] + 1e-12, "energy rose at step {k}: {} -> {}", w[0], w[1]);
    }
}

#[test]
fn steepest_backtracking_descends() {
    let g = small_grid();
    let tr = director_trace(Profile::Torus, Some(2), &g).unwrap();
    let cfg = SolverConfig {
        lambda: 5.0,
        direction: Direction::Steepest,
        step: StepRule::Backtracking { c: 1e-4, shrink: 0.5 },
        init: Init::Provided(perturbed_extension(&g, &tr, true)),
        max_iters: 300,
        ..Default::default()
    };
    let r = run(&cfg, &g, &tr);
    assert!(r.energy_history.len() > 10);
    assert_descent(&r);
}

#[test]
fn quasi_newton_descends_and_converges() {
    let g = small_grid();
    let tr = tangent_trace(0.0, &g).unwrap();
    let cfg = SolverConfig { init: Init::Provided(perturbed_extension(&g, &tr, true)), ..Default::default() };
    let r = run(&cfg, &g, &tr);
    assert!(r.is_converged(), "{:?}", r.status);
    assert_descent(&r);
    assert!(r.grad_history.last().unwrap() <= &1e-6);
}

#[test]
fn projected_steps_stay_on_the_sphere() {
    let g = small_grid();
    let tr = director_trace(Profile::Torus, Some(2), &g).unwrap();
    for direction in [Direction::Steepest, Direction::default()] {
        for iters in 1..=6 {
            let cfg = SolverConfig {
                lambda: 5.0,
                direction,
                max_iters: iters,
                init: Init::Provided(perturbed_extension(&g, &tr, true)),
                ..Default::default()
            };
            let r = run(&cfg, &g, &tr);
            assert!(r.field.max_norm_defect() <= 1e-10, "{direction:?} after {iters}: {}", r.field.max_norm_defect());
        }
    }
}

#[test]
fn sampled_equator_map_energy_converges_under_refinement() {
    let errors: Vec<f64> = [32usize, 64, 128]
        .iter()
        .map(|&n| {
            let g = HalfSliceGrid::ball(1.0, n, 2 * n).unwrap();
            (discrete_energy(&sampled_q0(&g), &g, 0.0).unwrap() - 4.0 * PI).abs()
        })
        .collect();
    for w in errors.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!(rate >= 1.0, "rate {rate} from errors {errors:?}");
    }
}

#[test]
fn penalty_mode_tightens_with_epsilon() {
    let g = HalfSliceGrid::ball(1.0, 24, 48).unwrap();
    let eps = [0.1, 0.05, 0.025];
    let defects = |tr: &BoundaryTrace| -> Vec<f64> {
        eps.iter()
            .map(|&e| {
                let cfg = SolverConfig { mode: Mode::GlPenalty { epsilon: e }, ..Default::default() };
                let r = run(&cfg, &g, tr);
                assert!(r.is_converged(), "eps {e}: {:?}", r.status);
                interior_norm_defect(&g, &r.field)
            })
            .collect()
    };

    // Constant data: the minimizer is e0 itself for every epsilon.
    let d = defects(&director_trace(Profile::Uniform, None, &g).unwrap());
    assert!(d.windows(2).all(|w| w[1] <= w[0]) && d[0] <= 1e-8, "{d:?}");

    // Degree-one data forces a defect core, which shrinks toward the unit sphere.
    let d = defects(&tangent_trace(0.0, &g).unwrap());
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
}

#[test]
fn analytic_gradient_matches_differences() {
    let err = gradient_check(20, 7).unwrap();
    assert!(err <= 1e-6, "relative error {err}");
}

#[test]
fn max_iters_is_reported() {
    let g = small_grid();
    let tr = tangent_trace(0.0, &g).unwrap();
    let cfg = SolverConfig { max_iters: 3, ..Default::default() };
    let r = run(&cfg, &g, &tr);
    assert_eq!(r.status, RunStatus::MaxIters);
    assert!(!r.is_converged());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn energy_is_invariant_under_global_rotation(alpha in -PI..PI, lambda in 0.0..10.0f64) {
        let g = small_grid();
        let tr = director_trace(Profile::Torus, Some(2), &g).unwrap();
        let f = perturbed_extension(&g, &tr, true);
        let e0 = discrete_energy(&f, &g, lambda).unwrap();
        let e1 = discrete_energy(&f.rotated(alpha), &g, lambda).unwrap();
        prop_assert!((e0 - e1).abs() <= 1e-12 * e0.abs().max(1.0));
    }
}
