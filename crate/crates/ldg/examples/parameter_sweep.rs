// Walk the full-sphere boundary family toward the tangent trace: as `mu2` shrinks the
// minimizer switches from a ring (torus) to an axis dipole (split).
//
// `cargo run --release --example parameter_sweep -- 64 target/sweep_mu2`

use ldg::cli::{run_sweep, SweepParam, SweepRow};
use ldg::config::RunConfig;
use ldg::topology::Verdict;
use std::path::{Path, PathBuf};

pub fn base_config(n_r: usize) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/split.toml");
    let mut cfg = RunConfig::load(&path).unwrap();
    cfg.grid.n_r = n_r;
    cfg.grid.n_z = 2 * n_r;
    cfg
}

pub fn sweep_mu2(n_r: usize, values: &[f64], out: &Path) -> Vec<SweepRow> {
    run_sweep(&base_config(n_r), SweepParam::Mu2, values, out).unwrap()
}

/// First value, in sweep order, classified as a split minimizer.
pub fn first_split(rows: &[SweepRow]) -> Option<f64> {
    rows.iter().find(|r| r.verdict == Some(Verdict::SplitMinimizer)).map(|r| r.value)
}

fn main() {
    let mut args = std::env::args().skip(1);
    let n_r = args.next().and_then(|a| a.parse().ok()).unwrap_or(64);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("target/sweep_mu2"));
    let rows = sweep_mu2(n_r, &[0.4, 0.3, 0.2, 0.15, 0.1, 0.05], &out);
    println!("{:>6} {:>12} {:>6} {:>6} {:>16}", "mu2", "energy", "sings", "ring", "verdict");
    for r in &rows {
        println!(
            "{:>6} {:>12.6} {:>6} {:>6} {:>16}",
            r.value,
            r.energy.unwrap_or(f64::NAN),
            r.singularities.map_or("-".into(), |n| n.to_string()),
            r.ring.map_or("-".into(), |b| b.to_string()),
            r.verdict.map_or("-".into(), |v| format!("{v:?}")),
        );
    }
    match first_split(&rows) {
        Some(v) => println!("first split minimizer at mu2 = {v}"),
        None => println!("no split minimizer over this range"),
    }
    println!("table and run directories in {}", out.display());
}
