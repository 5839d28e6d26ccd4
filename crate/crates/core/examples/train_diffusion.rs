//! Training a diffusion policy and rolling it out.
//!
//! Builds a dense static dataset, trains the diffusion policy, saves the
//! checkpoint and runs a handful of receding-horizon episodes.
//!
//! Run: `cargo run --release --example train_diffusion -- [steps]`

use move_bench::datagen::{build_dataset, DatasetSpec, GenContext, Paradigm, Sampling};
use move_bench::policy::{read_checkpoint, rollout, train, write_checkpoint, TrainConfig};
use move_bench::rng::stream;
use move_bench::world::{randomize_config, RandomizationLevel, World};

fn main() -> move_bench::Result<()> {
    let steps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let ctx = GenContext::default();
    let level = RandomizationLevel::ObjectOnly;
    let dataset = build_dataset(&DatasetSpec::new(Paradigm::Static, Sampling::DenseUniform, level, 6000, 1), &ctx)?;
    println!("{} trajectories, {} timesteps", dataset.trajectories.len(), dataset.total_timesteps());

    let cfg = TrainConfig {
        steps,
        ..TrainConfig::default()
    };
    let (ckpt, log) = train(&dataset, &cfg)?;
    for (step, loss) in &log.losses {
        println!("step {step:>6}  loss {loss:.4}");
    }
    let path = std::env::temp_dir().join("move-bench-example.ckpt");
    write_checkpoint(&ckpt, &path)?;
    let ckpt = read_checkpoint(&path)?;

    let mut successes = 0;
    for i in 0..10u64 {
        let mut rng = stream(99, &[i]);
        let scene = randomize_config(level, &ctx.world, &mut rng)?;
        let out = rollout(&ckpt, World::fixed(ctx.world, &scene), ctx.world.step_limit, stream(99, &[i, 1]))?;
        successes += usize::from(out.success());
        println!("episode {i}: score {} in {} steps", out.score, out.steps);
    }
    println!("{successes}/10 episodes placed the object");
    Ok(())
}
