//! Layered settings: defaults, a config file, then single-key overrides.
//!
//! Run: `cargo run --release --example config_overrides`

use move_bench::config::Settings;

fn main() -> move_bench::Result<()> {
    let mut settings = Settings::default();
    settings.apply_text(
        "# faster objects, longer lead\nmotion.v_max = 0.1\nexpert.lead_time = 0.25\n",
        "inline",
    )?;
    settings.set("train.steps", "2000")?;
    settings.set("world.workspace.max.x", "0.35")?;
    settings.validate()?;
    for (k, v) in settings.entries() {
        if k.starts_with("motion.") || k.starts_with("expert.") || k == "train.steps" {
            println!("{k} = {v}");
        }
    }
    match settings.set("motion.v_maxx", "1") {
        Err(e) => println!("rejected: {e}"),
        Ok(()) => unreachable!(),
    }
    let mut copy = Settings::default();
    copy.apply_text(&settings.to_text(), "round trip")?;
    println!("text round trip reproduces settings: {}", copy == settings);
    Ok(())
}
