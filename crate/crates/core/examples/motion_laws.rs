//! Object and camera motion laws.
//!
//! Samples a moving object and an orbiting camera, traces them for a few
//! seconds of simulated time and prints speed and direction statistics of
//! the samplers.
//!
//! Run: `cargo run --release --example motion_laws`

use std::f64::consts::PI;

use move_bench::geom::{Bounds, Vec2};
use move_bench::motion::{
    advance_camera, advance_rotation, advance_translation, sample_direction, sample_speed_fraction, CameraMotionState,
    MotionParams, MotionState,
};
use move_bench::rng::stream;

fn main() -> move_bench::Result<()> {
    let params = MotionParams::default();
    let bounds = Bounds::centered(0.3);
    let dt = 0.04;
    let mut rng = stream(7, &[]);

    let mut object = MotionState::sample(Vec2::new(0.25, 0.0), 0.0, &params, &mut rng)?;
    let mut camera = CameraMotionState::sample(PI / 2.0, &params, &mut rng)?;
    println!(
        "object speed {:.4} m/s, direction ({:.3}, {:.3}); camera rate {:.4} rad/s",
        object.speed_frac * params.v_max,
        object.dir.x,
        object.dir.y,
        camera.speed_frac * params.u_max
    );
    println!("{:>6} {:>8} {:>8} {:>8} {:>8}", "t", "x", "y", "heading", "camera");
    let mut bounces = 0;
    for step in 0..=250 {
        if step % 25 == 0 {
            println!(
                "{:>6.2} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
                step as f64 * dt,
                object.pos.x,
                object.pos.y,
                object.heading,
                camera.angle
            );
        }
        let next = advance_rotation(&advance_translation(&object, &params, &bounds, dt)?, &params, dt);
        if next.dir != object.dir {
            bounces += 1;
        }
        object = next;
        camera = advance_camera(&camera, &params, dt);
    }
    println!("{bounces} wall bounces");

    let n = 100_000;
    let mean = (0..n).map(|_| sample_speed_fraction(2.0, 5.0, &mut rng)).sum::<move_bench::Result<f64>>()? / n as f64;
    println!("Beta(2,5) speed fraction: mean {mean:.4} (exact {:.4})", 2.0 / 7.0);
    let mut quadrants = [0usize; 4];
    for _ in 0..n {
        let d = sample_direction(&mut rng);
        quadrants[usize::from(d.x < 0.0) + 2 * usize::from(d.y < 0.0)] += 1;
    }
    println!("direction quadrant shares: {:?}", quadrants.map(|q| q as f64 / n as f64));
    Ok(())
}
