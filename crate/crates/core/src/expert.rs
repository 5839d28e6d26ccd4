//! Scripted demonstrator.
//!
//! A pursuit controller with velocity lead: it chases the (possibly moving)
//! grasp point, carries the object to the (possibly moving) target and lets
//! go once inside the placement tolerance. It reads object and target
//! velocities straight from the motion state, which policies never see.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::motion::Phase;
use crate::world::{Action, World};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpertConfig {
    /// Seconds of look-ahead applied to moving goals.
    pub lead_time: f64,
    /// Release once the object is this close to the target, as a fraction of
    /// the placement tolerance.
    pub release_fraction: f64,
    /// Distance (m) below which the commanded speed falls off linearly.
    pub slow_radius: f64,
}

impl Default for ExpertConfig {
    fn default() -> Self {
        ExpertConfig {
            lead_time: 0.5,
            release_fraction: 0.5,
            slow_radius: 0.05,
        }
    }
}

/// Full speed towards `aim`, slowing linearly inside `slow_radius`. The
/// radius never drops below one control period of travel, so the gripper
/// cannot overshoot.
fn pursue(world: &World, aim: Vec2, slow_radius: f64) -> Vec2 {
    let reach = world.cfg.gripper_speed * world.cfg.dt;
    let mut v = (aim - world.state.gripper) * (1.0 / slow_radius.max(reach));
    let n = v.norm();
    if n > 1.0 {
        v = v * (1.0 / n);
    }
    v
}

/// Expert command for the current state, expressed in the camera frame.
pub fn expert_action(world: &World, expert: &ExpertConfig) -> Result<Action> {
    let s = &world.state;
    if s.phase == Phase::Done {
        return Err(Error::Episode("expert queried after the episode finished".into()));
    }
    let object = s.motion.object.pos;
    let target = s.motion.target.pos;
    let placed_here = object.distance(target) <= world.cfg.place_tolerance;

    let (world_vel, grasp) = if s.phase == Phase::Pick || (!s.grasped && !placed_here) {
        // Reach for the handle.
        let handle = world.grasp_point();
        let aim = handle + world.object_velocity() * expert.lead_time;
        let close = s.gripper.distance(handle) <= world.cfg.grasp_radius;
        (pursue(world, aim, expert.slow_radius), if close { 1.0 } else { 0.0 })
    } else {
        let aim = target + world.target_velocity() * expert.lead_time;
        let release = object.distance(target) <= world.cfg.place_tolerance * expert.release_fraction;
        let keep_open = !s.grasped && placed_here;
        (pursue(world, aim, expert.slow_radius), if release || keep_open { 0.0 } else { 1.0 })
    };

    let cam = world_vel.rotate(-s.motion.camera.angle);
    Ok(Action::new(cam.x, cam.y, grasp).clamped())
}
