// The on-disk workflow without the binary: a config written inline, a run on a
// cylinder, the analysis report, and a warm restart from the saved field.
//
// `cargo run --release --example run_files -- 48 target/run_files`

use ldg::cli::{analyze_dir, run_minimize};
use ldg::config::{InitSpec, RunConfig};
use ldg::io::{read_json, RunRecord, FIELD_CSV, RUN_JSON};
use ldg::topology::TopologyReport;
use std::path::{Path, PathBuf};

pub const CYLINDER: &str = r#"
schema = 1

[domain]
kind = "cylinder"
radius = 1.0
height = 2.0

[grid]
n_r = 48
n_z = 96

[solver]
lambda = 2.0
init = { kind = "dipole_seed", count = 1 }
seed = 3

[boundary]
kind = "full_sphere"
mu1 = 1.0
mu2 = 0.05
"#;

pub struct Session {
    pub first: RunRecord,
    pub report: TopologyReport,
    /// The warm restart at a larger lambda.
    pub restart: RunRecord,
}

pub fn session(n_r: usize, out: &Path) -> Session {
    let mut cfg = RunConfig::parse(CYLINDER).unwrap();
    cfg.grid.n_r = n_r;
    cfg.grid.n_z = 2 * n_r;
    let first_dir = out.join("cylinder");
    run_minimize(&cfg, &first_dir).unwrap();
    let report = analyze_dir(&first_dir, None).unwrap();
    let first: RunRecord = read_json(&first_dir.join(RUN_JSON)).unwrap();

    let mut warm = cfg.clone();
    warm.solver.lambda = 5.0;
    warm.solver.init = InitSpec::Provided { path: first_dir.join(FIELD_CSV) };
    let restart_dir = out.join("restart");
    run_minimize(&warm, &restart_dir).unwrap();
    let restart: RunRecord = read_json(&restart_dir.join(RUN_JSON)).unwrap();
    Session { first, report, restart }
}

fn main() {
    let mut args = std::env::args().skip(1);
    let n_r = args.next().and_then(|a| a.parse().ok()).unwrap_or(48);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("target/run_files"));
    let s = session(n_r, &out);
    println!("cylinder run: {:?} after {} iterations, E = {:.6}", s.first.status, s.first.iterations, s.first.energy);
    println!("  verdict {:?}, {} singularities, boundary beta min {:.3}", s.report.verdict, s.report.singularities.len(), s.report.hp1.value);
    println!("warm restart at lambda 5: {:?} after {} iterations, E = {:.6}", s.restart.status, s.restart.iterations, s.restart.energy);
    println!("artifacts under {}", out.display());
}
