//! Budget-matched datasets for every paradigm and sampling scheme.
//!
//! Builds static, ADC and MOVE datasets at the same timestep budget, prints
//! their sizes, writes one to disk and reads it back.
//!
//! Run: `cargo run --release --example build_datasets -- [budget]`

use move_bench::datagen::{build_dataset, read_dataset, write_dataset, DatasetSpec, GenContext, Paradigm, Sampling};
use move_bench::world::RandomizationLevel;

fn main() -> move_bench::Result<()> {
    let budget: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(6000);
    let ctx = GenContext::default();
    println!(
        "{:<8} {:<8} {:>6} {:>8} {:>8} {:>10}",
        "sampling", "paradigm", "trajs", "steps", "mean len", "gen success"
    );
    for sampling in [Sampling::Sparse9, Sampling::DenseUniform, Sampling::Circle] {
        for paradigm in [Paradigm::Static, Paradigm::Adc, Paradigm::Move] {
            let spec = DatasetSpec::new(paradigm, sampling, RandomizationLevel::ObjectOnly, budget, 1);
            let ds = build_dataset(&spec, &ctx)?;
            println!(
                "{:<8} {:<8} {:>6} {:>8} {:>8.1} {:>10.3}",
                sampling.name(),
                paradigm.name(),
                ds.trajectories.len(),
                ds.total_timesteps(),
                ds.mean_length(),
                ds.stats.success_rate()
            );
        }
    }

    let spec = DatasetSpec::new(Paradigm::Move, Sampling::DenseUniform, RandomizationLevel::ObjectTargetCamera, budget, 2);
    let ds = build_dataset(&spec, &ctx)?;
    let path = std::env::temp_dir().join("move-bench-example.ds");
    write_dataset(&ds, &path)?;
    let back = read_dataset(&path)?;
    println!(
        "wrote and re-read {} ({} bytes): {} trajectories, identical {}",
        path.display(),
        std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0),
        back.trajectories.len(),
        back == ds
    );
    Ok(())
}
