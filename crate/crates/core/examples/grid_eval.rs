//! Grid evaluation and report files.
//!
//! Evaluates the scripted expert, a random planner and a briefly trained
//! regression policy on the object-start grid, prints an ASCII heatmap and
//! writes the report files.
//!
//! Run: `cargo run --release --example grid_eval -- [out_dir]`

use std::path::PathBuf;

use move_bench::datagen::{build_dataset, DatasetSpec, GenContext, Paradigm, Sampling};
use move_bench::eval::{eval_checkpoint, eval_grid, write_report, EvalReport, ExpertPlanner, GridSpec, RandomPlanner};
use move_bench::policy::{train_bc_baseline, TrainConfig};
use move_bench::world::RandomizationLevel;

fn heatmap(report: &EvalReport) {
    let res = report.grid.resolution;
    // top row is high y
    for row in report.cells.chunks(res).rev() {
        let line: String = row
            .iter()
            .map(|c| match c.success_rate() {
                r if r >= 0.99 => '#',
                r if r >= 0.5 => '+',
                r if r > 0.0 => '.',
                _ => ' ',
            })
            .collect();
        println!("  |{line}|");
    }
}

fn main() -> move_bench::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("move-bench-grid"), PathBuf::from);
    let ctx = GenContext::default();
    let level = RandomizationLevel::ObjectOnly;
    let grid = GridSpec::new(13, 1, level, 4);

    let expert = eval_grid(&ExpertPlanner(ctx.expert), &ctx.world, &grid)?;
    let random = eval_grid(&RandomPlanner, &ctx.world, &grid)?;
    let data = build_dataset(&DatasetSpec::new(Paradigm::Static, Sampling::Sparse9, level, 6000, 1), &ctx)?;
    let cfg = TrainConfig {
        steps: 3000,
        ..TrainConfig::default()
    };
    let (ckpt, _) = train_bc_baseline(&data, &cfg)?;
    let bc = eval_checkpoint(&ckpt, &ctx.world, &grid)?;

    for (name, r) in [("expert", &expert), ("random", &random), ("bc on sparse9", &bc)] {
        println!("{name}: success {:.3}, normalized score {:.3}", r.success_rate, r.normalized_score);
        heatmap(r);
    }
    write_report(&bc, &out)?;
    println!("wrote cells.csv, summary.json and heatmap.pgm to {}", out.display());
    Ok(())
}
