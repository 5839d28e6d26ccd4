//! A full seeded comparison: static vs MOVE on nine sparse anchors.
//!
//! Uses the comparison runner, which builds a budget-matched dataset per arm
//! and seed, trains a policy and evaluates it on the grid. Any experiment
//! name works in place of `sparse9`.
//!
//! Run: `cargo run --release --example sparse9_comparison -- [experiment] [train_steps] [policy]`

use move_bench::eval::{write_comparison, ComparisonConfig, Experiment, Runner};
use move_bench::policy::PolicyKind;

fn main() -> move_bench::Result<()> {
    let mut args = std::env::args().skip(1);
    let experiment: Experiment = args.next().as_deref().unwrap_or("sparse9").parse()?;
    let steps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let policy: PolicyKind = args.next().as_deref().unwrap_or("diffusion").parse()?;

    let mut cfg = ComparisonConfig {
        policy,
        ..ComparisonConfig::default()
    };
    cfg.train.steps = steps;
    let runner = Runner::new(cfg);
    let report = runner.run(experiment, 6000, &[1, 2, 3])?;
    print!("{}", report.table());
    let dir = std::env::temp_dir().join(format!("move-bench-{experiment}"));
    write_comparison(&report, &dir)?;
    println!("per-run reports in {}", dir.display());
    Ok(())
}
