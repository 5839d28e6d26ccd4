//! Planar kinematic pick-and-place world.
//!
//! A point gripper must reach the handle of an asymmetric object (the grasp
//! point sits a fixed offset along the object's heading), carry the object
//! to a target and release it there. Observations are expressed in the frame
//! of a camera that orbits the scene centre, so changing the viewpoint
//! changes what the policy sees without changing the task.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Bounds, Vec2};
use crate::motion::{
    apply_schedule, AugmentationSchedule, CameraMotionState, MotionParams, MotionSet, MotionState, Phase,
};

pub const OBS_DIM: usize = 9;
pub const ACTION_DIM: usize = 3;

/// Number of rejection-sampling tries before a configuration draw gives up.
const MAX_CONFIG_TRIES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RandomizationLevel {
    ObjectOnly = 1,
    ObjectTarget = 2,
    ObjectTargetCamera = 3,
}

impl RandomizationLevel {
    pub const ALL: [RandomizationLevel; 3] = [
        RandomizationLevel::ObjectOnly,
        RandomizationLevel::ObjectTarget,
        RandomizationLevel::ObjectTargetCamera,
    ];

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(RandomizationLevel::ObjectOnly),
            2 => Ok(RandomizationLevel::ObjectTarget),
            3 => Ok(RandomizationLevel::ObjectTargetCamera),
            other => Err(Error::Parameter(format!("randomization level must be 1, 2 or 3, got {other}"))),
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub workspace: Bounds,
    /// Control period, s.
    pub dt: f64,
    pub step_limit: u32,
    /// Gripper speed for a unit velocity command, m/s.
    pub gripper_speed: f64,
    pub grasp_radius: f64,
    pub place_tolerance: f64,
    /// Consecutive released in-tolerance steps that count as a placement.
    pub place_hold_steps: u32,
    pub handle_offset: f64,
    pub min_separation: f64,
    pub gripper_home: Vec2,
    pub fixed_target: Vec2,
    pub fixed_camera: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            workspace: Bounds::centered(0.3),
            dt: 0.04,
            step_limit: 600,
            gripper_speed: 0.25,
            grasp_radius: 0.03,
            place_tolerance: 0.03,
            place_hold_steps: 5,
            handle_offset: 0.02,
            min_separation: 0.08,
            gripper_home: Vec2::new(0.0, -0.25),
            fixed_target: Vec2::new(0.20, 0.20),
            fixed_camera: PI / 2.0,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("gripper_speed", self.gripper_speed),
            ("grasp_radius", self.grasp_radius),
            ("place_tolerance", self.place_tolerance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("world.{name} must be > 0, got {v}")));
            }
        }
        if self.workspace.width() <= 0.0 || self.workspace.height() <= 0.0 {
            return Err(Error::Config("world workspace is empty".into()));
        }
        if !self.workspace.contains(self.gripper_home) || !self.workspace.contains(self.fixed_target) {
            return Err(Error::Config("gripper home and fixed target must lie in the workspace".into()));
        }
        if !(0.0..=PI).contains(&self.fixed_camera) {
            return Err(Error::Config("fixed camera angle must lie in [0, pi]".into()));
        }
        Ok(())
    }
}

/// Initial placement of everything in the scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialConfig {
    pub object_pos: Vec2,
    pub object_heading: f64,
    pub target_pos: Vec2,
    pub camera_angle: f64,
    pub level: RandomizationLevel,
}

fn uniform_point<R: Rng + ?Sized>(b: &Bounds, rng: &mut R) -> Vec2 {
    Vec2::new(
        rng.random_range(b.min.x..=b.max.x),
        rng.random_range(b.min.y..=b.max.y),
    )
}

/// Uniform heading on (-pi, pi].
pub fn random_heading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    wrap_angle(rng.random_range(-PI..PI))
}

/// Draws a configuration; factors above `level` stay at their fixed values.
pub fn randomize_config<R: Rng + ?Sized>(
    level: RandomizationLevel,
    cfg: &WorldConfig,
    rng: &mut R,
) -> Result<SpatialConfig> {
    for _ in 0..MAX_CONFIG_TRIES {
        let object_pos = uniform_point(&cfg.workspace, rng);
        let object_heading = random_heading(rng);
        let target_pos = if level >= RandomizationLevel::ObjectTarget {
            uniform_point(&cfg.workspace, rng)
        } else {
            cfg.fixed_target
        };
        let camera_angle = if level >= RandomizationLevel::ObjectTargetCamera {
            rng.random_range(0.0..=PI)
        } else {
            cfg.fixed_camera
        };
        if object_pos.distance(target_pos) >= cfg.min_separation {
            return Ok(SpatialConfig {
                object_pos,
                object_heading,
                target_pos,
                camera_angle,
                level,
            });
        }
    }
    Err(Error::Config(format!(
        "no configuration with object/target separation >= {} after {MAX_CONFIG_TRIES} tries",
        cfg.min_separation
    )))
}

/// Like [`randomize_config`] with the object pinned at `object_pos`.
///
/// The separation constraint is enforced on the factors still being drawn; a
/// pinned object that sits on a fixed target is returned as is.
pub fn randomize_around<R: Rng + ?Sized>(
    object_pos: Vec2,
    level: RandomizationLevel,
    cfg: &WorldConfig,
    rng: &mut R,
) -> Result<SpatialConfig> {
    let object_heading = random_heading(rng);
    let camera_angle = if level >= RandomizationLevel::ObjectTargetCamera {
        rng.random_range(0.0..=PI)
    } else {
        cfg.fixed_camera
    };
    if level < RandomizationLevel::ObjectTarget {
        return Ok(SpatialConfig {
            object_pos,
            object_heading,
            target_pos: cfg.fixed_target,
            camera_angle,
            level,
        });
    }
    for _ in 0..MAX_CONFIG_TRIES {
        let target_pos = uniform_point(&cfg.workspace, rng);
        if object_pos.distance(target_pos) >= cfg.min_separation {
            return Ok(SpatialConfig {
                object_pos,
                object_heading,
                target_pos,
                camera_angle,
                level,
            });
        }
    }
    Err(Error::Config("could not place target away from pinned object".into()))
}

/// Handle position: `offset` metres along the object's heading.
pub fn grasp_point(object: &MotionState, offset: f64) -> Vec2 {
    object.pos + Vec2::from_angle(object.heading) * offset
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    Approached,
    Grasped,
    Placed,
}

/// Step index at which each milestone was first reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventLog {
    pub approached: Option<u32>,
    pub grasped: Option<u32>,
    pub placed: Option<u32>,
}

impl EventLog {
    pub fn from_events(events: &[Event]) -> Self {
        let mut log = EventLog::default();
        for (i, e) in events.iter().enumerate() {
            log.record(*e, i as u32);
        }
        log
    }

    /// Records `event` at `step` unless it was already logged.
    pub fn record(&mut self, event: Event, step: u32) -> bool {
        let slot = match event {
            Event::Approached => &mut self.approached,
            Event::Grasped => &mut self.grasped,
            Event::Placed => &mut self.placed,
        };
        if slot.is_none() {
            *slot = Some(step);
            true
        } else {
            false
        }
    }

    pub fn contains(&self, event: Event) -> bool {
        match event {
            Event::Approached => self.approached.is_some(),
            Event::Grasped => self.grasped.is_some(),
            Event::Placed => self.placed.is_some(),
        }
    }
}

/// Rubric points: 1 approach, 2 grasp, 3 placement.
pub fn score_episode(log: &EventLog) -> u8 {
    if log.contains(Event::Placed) {
        3
    } else if log.contains(Event::Grasped) {
        2
    } else if log.contains(Event::Approached) {
        1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub gripper: Vec2,
    pub motion: MotionSet,
    pub grasped: bool,
    pub phase: Phase,
    pub step_count: u32,
    pub events: EventLog,
    /// Consecutive released steps with the object inside the placement tolerance.
    pub hold_streak: u32,
}

impl WorldState {
    pub fn new(gripper: Vec2, motion: MotionSet) -> Self {
        WorldState {
            gripper,
            motion,
            grasped: false,
            phase: Phase::Pick,
            step_count: 0,
            events: EventLog::default(),
            hold_streak: 0,
        }
    }
}

/// Camera-frame observation vector.
///
/// Layout: gripper (x, y), grasp point (x, y), object heading relative to the
/// camera as (sin, cos), target (x, y), grasped flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation(pub [f64; OBS_DIM]);

impl Observation {
    pub fn to_f32(&self) -> [f32; OBS_DIM] {
        self.0.map(|v| v as f32)
    }
}

/// Gripper command in the camera frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Action {
    /// Each component in [-1, 1], scaled by the gripper speed.
    pub velocity: Vec2,
    /// Closed when >= 0.5.
    pub grasp: f64,
}

impl Action {
    pub fn new(vx: f64, vy: f64, grasp: f64) -> Self {
        Action {
            velocity: Vec2::new(vx, vy),
            grasp,
        }
    }

    pub fn clamped(&self) -> Action {
        let c = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) };
        Action {
            velocity: Vec2::new(c(self.velocity.x), c(self.velocity.y)),
            grasp: if self.grasp.is_nan() { 0.0 } else { self.grasp.clamp(0.0, 1.0) },
        }
    }

    pub fn closed(&self) -> bool {
        self.grasp >= 0.5
    }

    pub fn to_array(&self) -> [f64; ACTION_DIM] {
        [self.velocity.x, self.velocity.y, self.grasp]
    }

    pub fn from_slice(v: &[f64]) -> Action {
        Action::new(v[0], v[1], v[2])
    }
}

/// One transition of the world.
///
/// Order: gripper motion, approach bookkeeping, grasp/release, carried object,
/// scheduled augmentation motion, placement check, step counter.
pub fn step(
    state: &WorldState,
    action: &Action,
    schedule: &AugmentationSchedule,
    params: &MotionParams,
    cfg: &WorldConfig,
) -> Result<(WorldState, Vec<Event>)> {
    if state.phase == Phase::Done {
        return Err(Error::Episode("step called after the episode finished".into()));
    }
    let action = action.clamped();
    let mut s = *state;
    let mut events = Vec::new();
    let now = s.step_count;

    let world_vel = action.velocity.rotate(s.motion.camera.angle);
    s.gripper = cfg.workspace.clamp(s.gripper + world_vel * (cfg.gripper_speed * cfg.dt));

    let handle = grasp_point(&s.motion.object, cfg.handle_offset);
    let near_handle = s.gripper.distance(handle) <= cfg.grasp_radius;
    if near_handle && s.events.record(Event::Approached, now) {
        events.push(Event::Approached);
    }

    if s.grasped {
        if !action.closed() {
            s.grasped = false;
        }
    } else if action.closed() && near_handle {
        s.grasped = true;
        if s.phase == Phase::Pick {
            s.phase = Phase::Place;
        }
        if s.events.record(Event::Grasped, now) {
            events.push(Event::Grasped);
        }
    }

    if s.grasped {
        s.motion.object.pos = s.gripper;
    }

    s.motion = apply_schedule(schedule, s.phase, &s.motion, params, &cfg.workspace, cfg.dt)?;

    let in_tolerance = s.motion.object.pos.distance(s.motion.target.pos) <= cfg.place_tolerance;
    if s.phase == Phase::Place && !s.grasped && !action.closed() && in_tolerance {
        s.hold_streak += 1;
    } else {
        s.hold_streak = 0;
    }
    if s.hold_streak >= cfg.place_hold_steps {
        s.phase = Phase::Done;
        if s.events.record(Event::Placed, now) {
            events.push(Event::Placed);
        }
    }

    s.step_count += 1;
    Ok((s, events))
}

/// Camera-frame observation of `state`.
pub fn observe(state: &WorldState, cfg: &WorldConfig) -> Observation {
    let phi = state.motion.camera.angle;
    let to_cam = |p: Vec2| p.rotate(-phi);
    let g = to_cam(state.gripper);
    let h = to_cam(grasp_point(&state.motion.object, cfg.handle_offset));
    let t = to_cam(state.motion.target.pos);
    let rel = state.motion.object.heading - phi;
    Observation([
        g.x,
        g.y,
        h.x,
        h.y,
        rel.sin(),
        rel.cos(),
        t.x,
        t.y,
        if state.grasped { 1.0 } else { 0.0 },
    ])
}

/// A world instance bundled with the constants that drive it.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub cfg: WorldConfig,
    pub params: MotionParams,
    pub schedule: AugmentationSchedule,
    pub state: WorldState,
}

impl World {
    /// Builds a world for `config`, drawing per-entity motion for every
    /// dimension the schedule activates. Inactive dimensions get zero speed.
    pub fn new<R: Rng + ?Sized>(
        cfg: WorldConfig,
        params: MotionParams,
        schedule: AugmentationSchedule,
        config: &SpatialConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let mut object = MotionState::sample(config.object_pos, config.object_heading, &params, rng)?;
        let mut target = MotionState::sample(config.target_pos, 0.0, &params, rng)?;
        let mut camera = CameraMotionState::sample(config.camera_angle, &params, rng)?;
        if !schedule.pick.object_translation {
            object.speed_frac = 0.0;
        }
        if !schedule.pick.object_rotation {
            object.omega_frac = 0.0;
        }
        target.omega_frac = 0.0;
        if !schedule.place.target_translation {
            target.speed_frac = 0.0;
        }
        if !schedule.pick.camera && !schedule.place.camera {
            camera.speed_frac = 0.0;
        }
        Ok(Self::from_motion(cfg, params, schedule, MotionSet { object, target, camera }))
    }

    pub fn from_motion(
        cfg: WorldConfig,
        params: MotionParams,
        schedule: AugmentationSchedule,
        motion: MotionSet,
    ) -> Self {
        World {
            state: WorldState::new(cfg.gripper_home, motion),
            cfg,
            params,
            schedule,
        }
    }

    /// A world where nothing moves.
    pub fn fixed(cfg: WorldConfig, config: &SpatialConfig) -> Self {
        let motion = MotionSet {
            object: MotionState::at_rest(config.object_pos, config.object_heading),
            target: MotionState::at_rest(config.target_pos, 0.0),
            camera: CameraMotionState::at_rest(config.camera_angle),
        };
        Self::from_motion(
            cfg,
            MotionParams::default(),
            AugmentationSchedule::static_paradigm(),
            motion,
        )
    }

    pub fn step(&mut self, action: &Action) -> Result<Vec<Event>> {
        let (next, events) = step(&self.state, action, &self.schedule, &self.params, &self.cfg)?;
        self.state = next;
        Ok(events)
    }

    pub fn observe(&self) -> Observation {
        observe(&self.state, &self.cfg)
    }

    pub fn grasp_point(&self) -> Vec2 {
        grasp_point(&self.state.motion.object, self.cfg.handle_offset)
    }

    pub fn is_terminal(&self) -> bool {
        self.state.phase == Phase::Done || self.state.step_count >= self.cfg.step_limit
    }

    pub fn score(&self) -> u8 {
        score_episode(&self.state.events)
    }

    /// World-frame object velocity while the schedule moves it, m/s.
    pub fn object_velocity(&self) -> Vec2 {
        if self.state.phase == Phase::Pick && self.schedule.pick.object_translation && !self.state.grasped {
            self.state.motion.object.velocity(&self.params)
        } else {
            Vec2::ZERO
        }
    }

    pub fn target_velocity(&self) -> Vec2 {
        if self.state.phase == Phase::Place && self.schedule.place.target_translation {
            self.state.motion.target.velocity(&self.params)
        } else {
            Vec2::ZERO
        }
    }
}
