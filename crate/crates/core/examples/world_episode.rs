//! Stepping the world by hand.
//!
//! Drives the gripper with a hand-written controller on a fixed scene,
//! printing the camera-frame observation and every rubric event.
//!
//! Run: `cargo run --release --example world_episode`

use move_bench::geom::Vec2;
use move_bench::world::{Action, RandomizationLevel, SpatialConfig, World, WorldConfig};

fn toward(from: Vec2, to: Vec2, speed: f64) -> Vec2 {
    let d = Vec2::new(to.x - from.x, to.y - from.y);
    let n = d.norm();
    if n < 1e-9 {
        Vec2::new(0.0, 0.0)
    } else {
        let s = (n / speed).min(1.0);
        Vec2::new(d.x / n * s, d.y / n * s)
    }
}

fn main() -> move_bench::Result<()> {
    let cfg = WorldConfig::default();
    let scene = SpatialConfig {
        object_pos: Vec2::new(-0.15, 0.05),
        object_heading: 0.6,
        target_pos: cfg.fixed_target,
        camera_angle: cfg.fixed_camera,
        level: RandomizationLevel::ObjectOnly,
    };
    let mut world = World::fixed(cfg, &scene);
    let travel = cfg.gripper_speed * cfg.dt;
    let mut released = false;
    while !world.is_terminal() {
        // everything below is in the camera frame, like the actions
        let o = world.observe().0;
        let gripper = Vec2::new(o[0], o[1]);
        let (goal, close) = if released {
            // open and still while the placement hold runs
            (gripper, false)
        } else if o[8] > 0.5 {
            let target = Vec2::new(o[6], o[7]);
            released = gripper.distance(target) <= 0.01;
            (target, !released)
        } else {
            let handle = Vec2::new(o[2], o[3]);
            (handle, gripper.distance(handle) < 0.01)
        };
        let v = toward(gripper, goal, travel);
        let events = world.step(&Action::new(v.x, v.y, if close { 1.0 } else { 0.0 }))?;
        let step = world.state.step_count;
        if !events.is_empty() || step.is_multiple_of(20) {
            let o = world.observe().0;
            println!(
                "step {step:>3}  gripper ({:+.3}, {:+.3})  handle ({:+.3}, {:+.3})  grasped {}  events {events:?}",
                o[0], o[1], o[2], o[3], o[8]
            );
        }
    }
    println!("score {} / 3 after {} steps", world.score(), world.state.step_count);
    Ok(())
}
