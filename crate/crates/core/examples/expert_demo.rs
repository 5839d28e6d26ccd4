//! Scripted expert on static and moving scenes.
//!
//! Rolls out the expert on random configurations at every randomization
//! level, with and without motion augmentation, and reports generation
//! success and mean demonstration length.
//!
//! Run: `cargo run --release --example expert_demo -- [episodes]`

use move_bench::datagen::{collect_or_retry, GenContext};
use move_bench::motion::AugmentationSchedule;
use move_bench::rng::stream;
use move_bench::world::{randomize_config, RandomizationLevel};

fn main() {
    let episodes: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let ctx = GenContext::default();

    println!("{:<6} {:<8} {:>10} {:>12}", "level", "paradigm", "success", "mean length");
    for level in RandomizationLevel::ALL {
        for (name, schedule) in [
            ("static", AugmentationSchedule::static_paradigm()),
            ("move", AugmentationSchedule::full()),
        ] {
            let (mut ok, mut steps) = (0u64, 0u64);
            for i in 0..episodes {
                let mut rng = stream(2024, &[level.index() as u64, i]);
                let config = randomize_config(level, &ctx.world, &mut rng).expect("config");
                // one rollout per configuration: this is the raw generation success rate
                let (traj, _) = collect_or_retry(&config, &schedule, 1, &ctx, rng_seed(i));
                if let Ok(t) = traj {
                    ok += 1;
                    steps += t.len() as u64;
                }
            }
            println!(
                "{:<6} {:<8} {:>9.1}% {:>12.1}",
                level.index(),
                name,
                100.0 * ok as f64 / episodes as f64,
                steps as f64 / ok.max(1) as f64
            );
        }
    }
}

fn rng_seed(i: u64) -> u64 {
    0x5eed_0000 + i
}
