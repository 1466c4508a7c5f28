//! Acceptance suite: one PASS/FAIL line per criterion, with wall time against its budget.
//!
//! Criteria listed under `[expected_failures]` in `baselines/acceptance.toml` print FAIL
//! with the recorded reason and do not fail the target; any other failure does.

use ldg::cli::{analyze_dir, run_minimize};
use ldg::config::RunConfig;
use ldg::solver::diagnostics::{axis_singularities, is_nondecreasing, monotonicity_profile};
use ldg::solver::{discrete_energy, EquivariantField};
use ldg::spheres::{
    conformality_gap, energy_density, eval_plane, eval_sphere, horizontality_residual, sphere_energy, tension_residual,
    twistor_curve_eval, twistor_lift, twistor_project, S2Point, SphereSpec, TwistorCurve,
};
use ldg::tensor_core::{Sign, SQRT3};
use ldg::topology::{Revolved, TopologyReport, Verdict};
use ldg::variation::{hedgehog_destabilizer, omega2_identity_gap, second_variation, stability_battery, Base, TangentMap};
use ldg::verify::{catalog, cone_law_residual, gradient_check};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Deserialize)]
struct Baselines {
    torus: TorusBaseline,
    split: SplitBaseline,
    expected_failures: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct TorusBaseline {
    config: PathBuf,
    verdict: Verdict,
    singularities: usize,
    ring_beta: f64,
    ring_beta_tol: f64,
    ring_beta_max: f64,
    tori_at_zero: usize,
    linking: bool,
}

#[derive(Deserialize)]
struct SplitBaseline {
    config: PathBuf,
    verdict: Verdict,
    singularities: usize,
    signs: Vec<String>,
    sphere_levels: Vec<f64>,
}

type Check = Result<String, String>;

struct Outcome {
    name: &'static str,
    result: Check,
    seconds: f64,
    budget: f64,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.result.is_ok() && self.seconds <= self.budget
    }
}

fn criterion(name: &'static str, budget: f64, f: impl FnOnce() -> Check) -> Outcome {
    let t = Instant::now();
    let result = f();
    Outcome { name, result, seconds: t.elapsed().as_secs_f64(), budget }
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn random_mu(rng: &mut ChaCha8Rng) -> C {
    C::from_polar(rng.random_range(0.3..3.0), rng.random_range(0.0..2.0 * PI))
}

fn energy_quantization() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let draws = [
            (SphereSpec::degenerate(1, random_mu(&mut rng), Sign::Plus), 4.0 * PI),
            (SphereSpec::degenerate(2, random_mu(&mut rng), Sign::Minus), 8.0 * PI),
            (SphereSpec::full(random_mu(&mut rng), random_mu(&mut rng)), 12.0 * PI),
        ];
        for (s, expect) in draws {
            let e = sphere_energy(&s, 256).map_err(|e| e.to_string())?;
            worst = worst.max((e - expect).abs() / expect);
        }
    }
    ensure(worst <= 1e-4, format!("worst relative error {worst:.2e} over 30 spheres"))
}

fn constant_density() -> Check {
    let s = SphereSpec::full_real(SQRT3, SQRT3);
    let worst = (0..20)
        .map(|k| (energy_density(&s, 0.05 + (PI - 0.1) * k as f64 / 19.0) - 6.0).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 1e-6, format!("max | |grad w|^2 - 6 | = {worst:.2e} at 20 latitudes"))
}

fn twistor_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut gap, mut horiz) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let (m1, m2) = (random_mu(&mut rng), random_mu(&mut rng));
        let curve = TwistorCurve::new([C::new(1.0, 0.0), m1, m2, -m1 * m2 / 3.0]).map_err(|e| e.to_string())?;
        horiz = horiz.max(horizontality_residual(&curve));
        let spec = SphereSpec::full(m1, m2);
        for _ in 0..50 {
            let p = S2Point::plane(C::from_polar(rng.random_range(0.05..5.0), rng.random_range(0.0..2.0 * PI)));
            let a = twistor_curve_eval(&curve, &p).and_then(|w| twistor_project(&w)).map_err(|e| e.to_string())?;
            let b = eval_sphere(&spec, &p).map_err(|e| e.to_string())?;
            gap = gap.max(a.distance(&b));
        }
    }
    ensure(gap <= 1e-12 && horiz <= 1e-12, format!("composition gap {gap:.2e}, horizontality {horiz:.2e}"))
}

fn lift_round_trip() -> Check {
    let mut worst = 0.0f64;
    for s in [SphereSpec::full_real(SQRT3, SQRT3), SphereSpec::full_real(1.0, 1.0)] {
        for k in 0..20 {
            let z = C::from_polar(0.2 + 0.15 * k as f64, 0.9 * k as f64 + 0.1);
            let lift = twistor_lift(&s, z, 1e-4).map_err(|e| e.to_string())?;
            let back = twistor_project(&lift.w).map_err(|e| e.to_string())?;
            worst = worst.max(back.distance(&eval_plane(&s, z)));
        }
    }
    ensure(worst <= 1e-4, format!("max |tau(lift) - w| = {worst:.2e} at 40 points"))
}

fn residuals() -> Check {
    let (mut tension, mut conf, mut iso) = (0.0f64, 0.0f64, 0.0f64);
    let mut sampled = 0;
    for s in catalog() {
        for k in 0..12 {
            let theta = 0.2 + (PI - 0.4) * (k as f64 + 0.5) / 12.0;
            let p = S2Point::spherical(theta, 0.37 * k as f64);
            tension = tension.max(tension_residual(&s, &p, 1e-3).map_err(|e| e.to_string())?);
            let g = conformality_gap(&s, &p, 1e-3).map_err(|e| e.to_string())?;
            conf = conf.max(g.length_gap).max(g.angle_gap).max(g.conf_residual.unwrap_or(0.0));
            if let Some(i) = g.iso_residual {
                iso = iso.max(i);
                sampled += 1;
            }
        }
    }
    ensure(
        tension.max(conf).max(iso) <= 1e-5,
        format!("tension {tension:.1e}, conformality {conf:.1e}, isotropy {iso:.1e} ({sampled} chart samples)"),
    )
}

fn hedgehog() -> Check {
    let mut v = Vec::new();
    for (n_r, n_t) in [(256, 32), (512, 64)] {
        let x = hedgehog_destabilizer(n_r, n_t).map_err(|e| e.to_string())?;
        v.push(second_variation(&Base::Hedgehog, &x).map_err(|e| e.to_string())?.value);
    }
    let stable = (v[0] - v[1]).abs() <= 0.05 * v[0].abs();
    ensure(v.iter().all(|x| *x < 0.0) && stable, format!("second variation {:.4} -> {:.4} under grid doubling", v[0], v[1]))
}

fn equator_battery() -> Check {
    let base = Base::Tangent(TangentMap::new(0.0, Sign::Plus));
    let v = stability_battery(&base, 99, 50, 200, 48).map_err(|e| e.to_string())?;
    let worst = v.iter().map(|(q, n)| q / n).fold(f64::INFINITY, f64::min);
    ensure(worst >= -1e-6, format!("min second variation / |X|^2 = {worst:.3e} over 50 fields"))
}

fn omega2() -> Check {
    let mut worst = 0.0f64;
    for s in [SphereSpec::full_real(SQRT3, SQRT3), SphereSpec::full_real(1.0, 1.0)] {
        worst = worst.max(omega2_identity_gap(&s, 256).map_err(|e| e.to_string())?);
    }
    ensure(worst <= 1e-5, format!("relative gap {worst:.2e}"))
}

fn load(path: &Path) -> Result<RunConfig, String> {
    RunConfig::load(&root().join(path)).map_err(|e| e.to_string())
}

struct TangentRun {
    run: ldg::solver::SolverRun,
}

fn solver_baseline(out: &Path, keep: &mut Option<TangentRun>) -> Check {
    let cfg = load(Path::new("configs/tangent.toml"))?;
    let (run, _) = run_minimize(&cfg, out).map_err(|e| e.to_string())?;
    let sings = axis_singularities(&run.grid, &run.field);
    // Independent reference: the sampled equator map, whose continuum energy is exactly 4 pi.
    let sampled = EquivariantField::from_fn(&run.grid, |r, z| {
        let d = (r * r + z * z).sqrt();
        TangentMap::new(0.0, Sign::Plus).split_at([r / d, 0.0, z / d])
    });
    let e_sampled = discrete_energy(&sampled, &run.grid, 0.0).map_err(|e| e.to_string())?;
    let ratio = run.energy() / (4.0 * PI);
    let ok = run.is_converged()
        && (0.98..=1.05).contains(&ratio)
        && sings.len() == 1
        && sings[0].sign == Sign::Plus
        && run.energy() <= e_sampled * (1.0 + 1e-9);
    let msg = format!(
        "{:?} after {} iterations, E = {ratio:.5} x 4pi (sampled Q0: {:.5} x 4pi), singularities {:?}",
        run.status,
        run.energy_history.len() - 1,
        e_sampled / (4.0 * PI),
        sings.iter().map(|s| format!("{}{:.3}", if s.sign == Sign::Plus { "+" } else { "-" }, s.z)).collect::<Vec<_>>()
    );
    *keep = Some(TangentRun { run });
    ensure(ok, msg)
}

fn monotonicity(keep: &Option<TangentRun>) -> Check {
    let t = keep.as_ref().ok_or("solver baseline did not produce a run")?;
    let sings = axis_singularities(&t.run.grid, &t.run.field);
    let z0 = sings.first().map_or(0.0, |s| s.z);
    let radii = [0.1, 0.2, 0.3, 0.4, 0.5];
    let prof = monotonicity_profile(&t.run, z0, &radii).map_err(|e| e.to_string())?;
    let vals: Vec<String> = prof.iter().map(|(_, q)| format!("{:.4}", q / (4.0 * PI))).collect();
    ensure(is_nondecreasing(&prof, 0.02), format!("E(B_r)/r / 4pi about z = {z0:.3}: {}", vals.join(", ")))
}

fn torus(b: &TorusBaseline, out: &Path) -> Check {
    let cfg = load(&b.config)?;
    let (run, _) = run_minimize(&cfg, out).map_err(|e| e.to_string())?;
    let rep = analyze_dir(out, None).map_err(|e| e.to_string())?;
    let ring = rep.ring.ok_or_else(|| format!("no ring (verdict {:?})", rep.verdict))?;
    let tori = rep.level(0.0).map_or(0, |l| l.count(Revolved::Torus));
    let ok = rep.verdict == b.verdict
        && rep.singularities.len() == b.singularities
        && ring.beta <= b.ring_beta_max
        && (ring.beta - b.ring_beta).abs() <= b.ring_beta_tol
        && ring.r > 2.0 * run.grid.dr
        && tori == b.tori_at_zero
        && rep.linking == b.linking;
    ensure(
        ok,
        format!(
            "{:?}, {} singularities, ring at r = {:.3} with beta {:.4}, {tori} torus at t = 0, linking {}, E = {:.4} x 4pi",
            rep.verdict,
            rep.singularities.len(),
            ring.r,
            ring.beta,
            rep.linking,
            run.energy() / (4.0 * PI)
        ),
    )
}

fn sphere_joins_dipole(rep: &TopologyReport, t: f64) -> bool {
    rep.level(t).is_some_and(|l| {
        l.components
            .iter()
            .any(|c| c.revolved == Revolved::TopologicalSphere && c.singularities.len() == 2 && c.singularities[1] == c.singularities[0] + 1)
    })
}

/// Marks the one split sub-check covered by `[expected_failures]`.
const NO_SPHERE_AT_ZERO: &str = "no sphere at t = 0";

fn split(b: &SplitBaseline, out: &Path) -> Check {
    let cfg = load(&b.config)?;
    run_minimize(&cfg, out).map_err(|e| e.to_string())?;
    let rep = analyze_dir(out, None).map_err(|e| e.to_string())?;
    let signs: Vec<String> = rep.singularities.iter().map(|s| ldg::topology::sign_symbol(s.sign).to_string()).collect();
    let alternating = rep.singularities.windows(2).all(|w| w[0].sign != w[1].sign);
    let count_ok = rep.singularities.len() == b.singularities && rep.singularities.len() >= 2 && rep.singularities.len() % 2 == 0;
    let below: Vec<f64> = b.sphere_levels.iter().copied().filter(|&t| sphere_joins_dipole(&rep, t)).collect();
    let at_zero = sphere_joins_dipole(&rep, 0.0);
    let zero_kinds: Vec<String> = rep
        .level(0.0)
        .map(|l| l.components.iter().map(|c| format!("{:?}", c.revolved)).collect())
        .unwrap_or_default();
    let msg = format!(
        "{:?}, singularities {signs:?} (alternating {alternating}), dipole spheres at t = {below:?}, t = 0 components {zero_kinds:?}, boundary beta min {:.3}",
        rep.verdict, rep.hp1.value
    );
    let rest = rep.verdict == b.verdict && count_ok && alternating && signs == b.signs && below.len() == b.sphere_levels.len();
    match (rest, at_zero) {
        (true, true) => Ok(msg),
        (true, false) => Err(format!("{msg}; {NO_SPHERE_AT_ZERO}")),
        _ => Err(msg),
    }
}

fn reproducibility(reference: &Path, out: &Path) -> Check {
    let cfg = load(Path::new("configs/torus.toml"))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    pool.install(|| -> Result<(), String> {
        run_minimize(&cfg, out).map_err(|e| e.to_string())?;
        analyze_dir(out, None).map_err(|e| e.to_string())?;
        Ok(())
    })?;
    let files = ["field.csv", "run.json", "energy_history.csv", "report.json", "beta.csv"];
    let differing: Vec<&str> = files
        .iter()
        .copied()
        .filter(|f| std::fs::read(reference.join(f)).ok() != std::fs::read(out.join(f)).ok())
        .collect();
    ensure(
        differing.is_empty(),
        format!("{} artifacts compared between 1 and 3 threads; differing: {differing:?}", files.len()),
    )
}

fn main() {
    let baselines: Baselines = toml::from_str(&std::fs::read_to_string(root().join("baselines/acceptance.toml")).unwrap()).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let dir = |n: &str| tmp.path().join(n);
    let mut tangent = None;
    let pool3 = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();

    let outcomes = vec![
        criterion("energy_quantization", 10.0, energy_quantization),
        criterion("constant_energy_density", 1.0, constant_density),
        criterion("twistor_identity", 5.0, twistor_identity),
        criterion("lift_round_trip", 5.0, lift_round_trip),
        criterion("harmonicity_conformality_isotropy", 10.0, residuals),
        criterion("hedgehog_instability", 10.0, hedgehog),
        criterion("equator_map_nonnegativity", 60.0, equator_battery),
        criterion("omega2_identity", 5.0, omega2),
        criterion("solver_baseline", 300.0, || solver_baseline(&dir("tangent"), &mut tangent)),
        criterion("gradient_correctness", 30.0, || {
            let w = gradient_check(20, 31)?;
            ensure(w <= 1e-6, format!("worst relative mismatch {w:.2e} at 20 nodes x 3 configurations"))
        }),
        criterion("monotonicity", 10.0, || monotonicity(&tangent)),
        criterion("torus_phenomenology", 600.0, || pool3.install(|| torus(&baselines.torus, &dir("torus")))),
        criterion("split_phenomenology", 600.0, || split(&baselines.split, &dir("split"))),
        criterion("beta_cone_law", 1.0, || {
            let r = cone_law_residual(50);
            ensure(r <= 1e-6, format!("max deviation {r:.2e} at 50 angles"))
        }),
        criterion("reproducibility", 1200.0, || reproducibility(&dir("torus"), &dir("torus_1thread"))),
    ];

    let mut unexpected = 0;
    for o in &outcomes {
        let (tag, detail) = match &o.result {
            Ok(m) | Err(m) => (if o.passed() { "PASS" } else { "FAIL" }, m.clone()),
        };
        let over = if o.seconds > o.budget { " [over time budget]" } else { "" };
        println!("{tag} {:<36} {:>8.2}s / {:>5.0}s{over}  {detail}", o.name, o.seconds, o.budget);
        if !o.passed() {
            let key = match (&o.result, o.name) {
                (Err(m), "split_phenomenology") if m.ends_with(NO_SPHERE_AT_ZERO) => "split_sphere_at_zero",
                (_, other) => other,
            };
            match baselines.expected_failures.get(key) {
                Some(reason) => println!("     expected failure: {reason}"),
                None => unexpected += 1,
            }
        }
    }
    let passed = outcomes.iter().filter(|o| o.passed()).count();
    println!("acceptance: {passed}/{} criteria pass, {unexpected} unexpected failures", outcomes.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
