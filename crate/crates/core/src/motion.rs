//! Kinematic motion laws used to augment demonstrations.
//!
//! Three entities can move while a demonstration is recorded: the pickup
//! object (planar translation with specular bounce, plus rotation about the
//! vertical axis), the target (translation only) and the camera (an arc at
//! fixed radius, angle confined to `[0, pi]`). Each entity draws its speed
//! fraction once from a Beta distribution and keeps it for the whole episode.
//! Which entities actually move is decided per task phase by an
//! [`AugmentationSchedule`].

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{reflect_into, wrap_angle, Bounds, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionParams {
    /// Max translation speed, m/s.
    pub v_max: f64,
    /// Max object angular speed, rad/s.
    pub omega_max: f64,
    /// Max camera angular speed along its arc, rad/s.
    pub u_max: f64,
    pub alpha_p: f64,
    pub beta_p: f64,
    pub alpha_theta: f64,
    pub beta_theta: f64,
    pub alpha_c: f64,
    pub beta_c: f64,
}

impl Default for MotionParams {
    fn default() -> Self {
        MotionParams {
            v_max: 0.05,
            omega_max: 0.5,
            u_max: 0.2,
            alpha_p: 2.0,
            beta_p: 5.0,
            alpha_theta: 2.0,
            beta_theta: 5.0,
            alpha_c: 2.0,
            beta_c: 5.0,
        }
    }
}

impl MotionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("v_max", self.v_max),
            ("omega_max", self.omega_max),
            ("u_max", self.u_max),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("alpha_p", self.alpha_p),
            ("beta_p", self.beta_p),
            ("alpha_theta", self.alpha_theta),
            ("beta_theta", self.beta_theta),
            ("alpha_c", self.alpha_c),
            ("beta_c", self.beta_c),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Rotation sense about the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spin {
    Ccw,
    Cw,
}

impl Spin {
    pub fn sign(self) -> f64 {
        match self {
            Spin::Ccw => 1.0,
            Spin::Cw => -1.0,
        }
    }
}

/// Planar pose plus the constant motion parameters of one movable entity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionState {
    pub pos: Vec2,
    /// Unit travel direction.
    pub dir: Vec2,
    /// Fraction of `v_max`, in `[0, 1]`.
    pub speed_frac: f64,
    pub heading: f64,
    /// Fraction of `omega_max`, in `[0, 1]`.
    pub omega_frac: f64,
    pub spin: Spin,
}

impl MotionState {
    /// A motionless entity at `pos`.
    pub fn at_rest(pos: Vec2, heading: f64) -> Self {
        MotionState {
            pos,
            dir: Vec2::new(1.0, 0.0),
            speed_frac: 0.0,
            heading,
            omega_frac: 0.0,
            spin: Spin::Ccw,
        }
    }

    /// Draws direction, speed, angular speed and spin for an entity at `pos`.
    pub fn sample<R: Rng + ?Sized>(
        pos: Vec2,
        heading: f64,
        params: &MotionParams,
        rng: &mut R,
    ) -> Result<Self> {
        let dir = sample_direction(rng);
        let speed_frac = sample_speed_fraction(params.alpha_p, params.beta_p, rng)?;
        let omega_frac = sample_speed_fraction(params.alpha_theta, params.beta_theta, rng)?;
        let spin = if rng.random::<bool>() { Spin::Ccw } else { Spin::Cw };
        Ok(MotionState {
            pos,
            dir,
            speed_frac,
            heading,
            omega_frac,
            spin,
        })
    }

    /// World-frame translation velocity, m/s.
    pub fn velocity(&self, params: &MotionParams) -> Vec2 {
        self.dir * (self.speed_frac * params.v_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraMotionState {
    /// Arc angle, in `[0, pi]`.
    pub angle: f64,
    pub speed_frac: f64,
    /// +1 or -1.
    pub dir: f64,
}

impl CameraMotionState {
    pub fn at_rest(angle: f64) -> Self {
        CameraMotionState {
            angle,
            speed_frac: 0.0,
            dir: 1.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(angle: f64, params: &MotionParams, rng: &mut R) -> Result<Self> {
        let speed_frac = sample_speed_fraction(params.alpha_c, params.beta_c, rng)?;
        let dir = if rng.random::<bool>() { 1.0 } else { -1.0 };
        Ok(CameraMotionState {
            angle,
            speed_frac,
            dir,
        })
    }
}

/// One Beta(alpha, beta) variate.
pub fn sample_speed_fraction<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> Result<f64> {
    let dist = Beta::new(alpha, beta)
        .map_err(|e| Error::Parameter(format!("Beta({alpha}, {beta}): {e}")))?;
    Ok(dist.sample(rng))
}

/// Uniform direction on the unit circle.
pub fn sample_direction<R: Rng + ?Sized>(rng: &mut R) -> Vec2 {
    Vec2::from_angle(rng.random_range(0.0..(2.0 * PI)))
}

/// Straight-line step with specular bounce off the edges of `bounds`.
pub fn advance_translation(
    state: &MotionState,
    params: &MotionParams,
    bounds: &Bounds,
    dt: f64,
) -> Result<MotionState> {
    if !bounds.contains(state.pos) {
        return Err(Error::State(format!(
            "position ({}, {}) outside motion bounds",
            state.pos.x, state.pos.y
        )));
    }
    let step = state.speed_frac * params.v_max * dt;
    let raw = state.pos + state.dir * step;
    let (x, flip_x) = reflect_into(raw.x, bounds.min.x, bounds.max.x);
    let (y, flip_y) = reflect_into(raw.y, bounds.min.y, bounds.max.y);
    let mut next = *state;
    next.pos = Vec2::new(x, y);
    if flip_x {
        next.dir.x = -next.dir.x;
    }
    if flip_y {
        next.dir.y = -next.dir.y;
    }
    Ok(next)
}

/// Constant angular velocity about the vertical axis; heading kept in (-pi, pi].
pub fn advance_rotation(state: &MotionState, params: &MotionParams, dt: f64) -> MotionState {
    let mut next = *state;
    next.heading = wrap_angle(state.heading + state.spin.sign() * state.omega_frac * params.omega_max * dt);
    next
}

/// Camera arc step, reflecting at 0 and pi.
pub fn advance_camera(state: &CameraMotionState, params: &MotionParams, dt: f64) -> CameraMotionState {
    let raw = state.angle + state.dir * state.speed_frac * params.u_max * dt;
    let (angle, flip) = reflect_into(raw, 0.0, PI);
    CameraMotionState {
        angle,
        speed_frac: state.speed_frac,
        dir: if flip { -state.dir } else { state.dir },
    }
}

/// Semantic task phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    Pick,
    Place,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PickFlags {
    pub object_translation: bool,
    pub object_rotation: bool,
    pub camera: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PlaceFlags {
    pub target_translation: bool,
    pub camera: bool,
}

/// Per-phase activation of each augmentation dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AugmentationSchedule {
    pub pick: PickFlags,
    pub place: PlaceFlags,
}

impl AugmentationSchedule {
    /// Nothing moves: the static collection paradigm.
    pub fn static_paradigm() -> Self {
        Self::default()
    }

    /// Every dimension active in its phase.
    pub fn full() -> Self {
        AugmentationSchedule {
            pick: PickFlags {
                object_translation: true,
                object_rotation: true,
                camera: true,
            },
            place: PlaceFlags {
                target_translation: true,
                camera: true,
            },
        }
    }

    /// Moves exactly the factors that a randomization level varies.
    pub fn for_level(level: crate::world::RandomizationLevel) -> Self {
        use crate::world::RandomizationLevel::*;
        let mut s = AugmentationSchedule {
            pick: PickFlags {
                object_translation: true,
                object_rotation: true,
                camera: false,
            },
            place: PlaceFlags::default(),
        };
        if level >= ObjectTarget {
            s.place.target_translation = true;
        }
        if level >= ObjectTargetCamera {
            s.pick.camera = true;
            s.place.camera = true;
        }
        s
    }

    /// Cumulative dimension ladder: 1 = object translation, 2 = + target
    /// translation, 3 = + camera, 4 = + object rotation.
    pub fn cumulative(dims: usize) -> Self {
        let mut s = Self::static_paradigm();
        if dims >= 1 {
            s.pick.object_translation = true;
        }
        if dims >= 2 {
            s.place.target_translation = true;
        }
        if dims >= 3 {
            s.pick.camera = true;
            s.place.camera = true;
        }
        if dims >= 4 {
            s.pick.object_rotation = true;
        }
        s
    }

    pub fn is_static(&self) -> bool {
        *self == Self::static_paradigm()
    }

    pub fn camera_active(&self, phase: Phase) -> bool {
        match phase {
            Phase::Pick => self.pick.camera,
            Phase::Place => self.place.camera,
            Phase::Done => false,
        }
    }
}

/// Motion state of every movable entity in the scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionSet {
    pub object: MotionState,
    pub target: MotionState,
    pub camera: CameraMotionState,
}

/// Advances the entities the schedule activates for `phase`; everything else
/// is returned untouched.
pub fn apply_schedule(
    schedule: &AugmentationSchedule,
    phase: Phase,
    set: &MotionSet,
    params: &MotionParams,
    bounds: &Bounds,
    dt: f64,
) -> Result<MotionSet> {
    let mut next = *set;
    match phase {
        Phase::Pick => {
            if schedule.pick.object_translation {
                next.object = advance_translation(&next.object, params, bounds, dt)?;
            }
            if schedule.pick.object_rotation {
                next.object = advance_rotation(&next.object, params, dt);
            }
            if schedule.pick.camera {
                next.camera = advance_camera(&next.camera, params, dt);
            }
        }
        Phase::Place => {
            if schedule.place.target_translation {
                next.target = advance_translation(&next.target, params, bounds, dt)?;
            }
            if schedule.place.camera {
                next.camera = advance_camera(&next.camera, params, dt);
            }
        }
        Phase::Done => {}
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn state(pos: Vec2, dir: Vec2, speed_frac: f64) -> MotionState {
        MotionState {
            pos,
            dir,
            speed_frac,
            heading: 0.0,
            omega_frac: 0.0,
            spin: Spin::Ccw,
        }
    }

    fn unit_speed() -> MotionParams {
        MotionParams {
            v_max: 1.0,
            omega_max: 1.0,
            u_max: 1.0,
            ..MotionParams::default()
        }
    }

    #[test]
    fn beta_rejects_bad_shapes() {
        let mut rng = stream(1, &[]);
        assert!(sample_speed_fraction(0.0, 5.0, &mut rng).is_err());
        assert!(sample_speed_fraction(2.0, -1.0, &mut rng).is_err());
    }

    #[test]
    fn beta_stream_is_deterministic() {
        let mut a = stream(42, &[]);
        let mut b = stream(42, &[]);
        for _ in 0..100 {
            let x = sample_speed_fraction(2.0, 5.0, &mut a).unwrap();
            let y = sample_speed_fraction(2.0, 5.0, &mut b).unwrap();
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn zero_speed_does_not_move() {
        let b = Bounds::centered(0.3);
        let s = state(Vec2::new(0.1, -0.2), Vec2::new(0.6, 0.8), 0.0);
        for dt in [0.01, 1.0, 100.0] {
            assert_eq!(advance_translation(&s, &unit_speed(), &b, dt).unwrap().pos, s.pos);
        }
    }

    #[test]
    fn interior_step() {
        let b = Bounds::centered(0.3);
        let s = state(Vec2::ZERO, Vec2::new(1.0, 0.0), 1.0);
        let n = advance_translation(&s, &unit_speed(), &b, 0.05).unwrap();
        assert!((n.pos.x - 0.05).abs() < 1e-15 && n.pos.y == 0.0);
        assert_eq!(n.dir, s.dir);
    }

    #[test]
    fn bounce_reflects_overshoot() {
        let b = Bounds::centered(0.3);
        let s = state(Vec2::new(0.28, 0.0), Vec2::new(1.0, 0.0), 1.0);
        let n = advance_translation(&s, &unit_speed(), &b, 0.05).unwrap();
        assert!((n.pos.x - 0.27).abs() < 1e-12);
        assert_eq!(n.dir, Vec2::new(-1.0, 0.0));
        assert_eq!(n.speed_frac, 1.0);
    }

    #[test]
    fn outside_bounds_is_an_error() {
        let b = Bounds::centered(0.3);
        let s = state(Vec2::new(0.31, 0.0), Vec2::new(1.0, 0.0), 1.0);
        assert!(matches!(
            advance_translation(&s, &unit_speed(), &b, 0.04),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn rotation_wraps() {
        let mut s = state(Vec2::ZERO, Vec2::new(1.0, 0.0), 0.0);
        s.heading = 3.0;
        s.omega_frac = 1.0;
        let n = advance_rotation(&s, &unit_speed(), 0.5);
        assert!((n.heading - (3.5 - 2.0 * PI)).abs() < 1e-12);
        assert!((n.heading + 2.783).abs() < 1e-3);

        s.spin = Spin::Cw;
        s.heading = 0.0;
        let ccw = advance_rotation(&MotionState { spin: Spin::Ccw, ..s }, &unit_speed(), 0.3);
        let cw = advance_rotation(&s, &unit_speed(), 0.3);
        assert_eq!(ccw.heading, -cw.heading);

        s.omega_frac = 0.0;
        assert_eq!(advance_rotation(&s, &unit_speed(), 0.3).heading, 0.0);
    }

    #[test]
    fn camera_reflects_at_pi() {
        let c = CameraMotionState {
            angle: 3.10,
            speed_frac: 1.0,
            dir: 1.0,
        };
        let n = advance_camera(&c, &unit_speed(), 0.10);
        assert!((n.angle - (2.0 * PI - 3.20)).abs() < 1e-12);
        assert!((n.angle - 3.0832).abs() < 1e-4);
        assert_eq!(n.dir, -1.0);

        let c = CameraMotionState {
            angle: 1.0,
            speed_frac: 1.0,
            dir: 1.0,
        };
        assert!((advance_camera(&c, &unit_speed(), 0.5).angle - 1.5).abs() < 1e-15);
        let c = CameraMotionState { speed_frac: 0.0, ..c };
        assert_eq!(advance_camera(&c, &unit_speed(), 0.5).angle, 1.0);
    }

    fn moving_set() -> MotionSet {
        MotionSet {
            object: state(Vec2::new(0.1, 0.1), Vec2::new(0.0, 1.0), 0.5),
            target: state(Vec2::new(-0.1, 0.0), Vec2::new(1.0, 0.0), 0.5),
            camera: CameraMotionState {
                angle: 1.0,
                speed_frac: 0.5,
                dir: 1.0,
            },
        }
    }

    #[test]
    fn static_schedule_freezes_everything() {
        let set = moving_set();
        let b = Bounds::centered(0.3);
        for phase in [Phase::Pick, Phase::Place, Phase::Done] {
            let n = apply_schedule(
                &AugmentationSchedule::static_paradigm(),
                phase,
                &set,
                &unit_speed(),
                &b,
                0.04,
            )
            .unwrap();
            assert_eq!(n, set);
        }
    }

    #[test]
    fn pick_phase_object_translation_only() {
        let set = moving_set();
        let sched = AugmentationSchedule::cumulative(1);
        let n = apply_schedule(&sched, Phase::Pick, &set, &unit_speed(), &Bounds::centered(0.3), 0.04).unwrap();
        assert_ne!(n.object.pos, set.object.pos);
        assert_eq!(n.target, set.target);
        assert_eq!(n.camera, set.camera);
    }

    #[test]
    fn place_phase_full_schedule_leaves_object() {
        let set = moving_set();
        let n = apply_schedule(
            &AugmentationSchedule::full(),
            Phase::Place,
            &set,
            &unit_speed(),
            &Bounds::centered(0.3),
            0.04,
        )
        .unwrap();
        assert_eq!(n.object, set.object);
        assert_ne!(n.target.pos, set.target.pos);
        assert_ne!(n.camera.angle, set.camera.angle);
    }

    #[test]
    fn cumulative_ladder_adds_one_dimension_each() {
        assert!(AugmentationSchedule::cumulative(0).is_static());
        let full = AugmentationSchedule::cumulative(4);
        assert_eq!(full, AugmentationSchedule::full());
        let c3 = AugmentationSchedule::cumulative(3);
        assert!(c3.pick.camera && c3.place.camera && !c3.pick.object_rotation);
    }
}
