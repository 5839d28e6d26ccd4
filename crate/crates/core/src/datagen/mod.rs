//! Budget-matched demonstration datasets.
//!
//! A dataset is grown trajectory by trajectory until its total number of
//! environment steps reaches the requested budget, so paradigms that produce
//! longer demonstrations end up with fewer of them.

mod format;

pub use format::{read_dataset, read_dataset_bytes, write_dataset, write_dataset_bytes, FORMAT_VERSION};

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expert::{expert_action, ExpertConfig};
use crate::geom::Vec2;
use crate::motion::{AugmentationSchedule, MotionParams, Phase};
use crate::rng::{derive_seed, stream};
use crate::world::{
    random_heading, randomize_around, randomize_config, RandomizationLevel, SpatialConfig, World, WorldConfig,
    ACTION_DIM, OBS_DIM,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Paradigm {
    Static,
    Adc,
    Move,
}

impl Paradigm {
    pub fn name(self) -> &'static str {
        match self {
            Paradigm::Static => "static",
            Paradigm::Adc => "adc",
            Paradigm::Move => "move",
        }
    }
}

impl fmt::Display for Paradigm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Paradigm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Ok(Paradigm::Static),
            "adc" => Ok(Paradigm::Adc),
            "move" => Ok(Paradigm::Move),
            _ => Err(Error::Parameter(format!("unknown paradigm '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sampling {
    Sparse9,
    DenseUniform,
    Circle,
}

impl Sampling {
    pub fn name(self) -> &'static str {
        match self {
            Sampling::Sparse9 => "sparse9",
            Sampling::DenseUniform => "dense",
            Sampling::Circle => "circle",
        }
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sampling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sparse9" => Ok(Sampling::Sparse9),
            "dense" | "denseuniform" => Ok(Sampling::DenseUniform),
            "circle" => Ok(Sampling::Circle),
            _ => Err(Error::Parameter(format!("unknown sampling strategy '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatagenConfig {
    /// ADC teleports the object every this many steps until it is grasped.
    pub adc_period: u32,
    pub max_retries: u32,
    /// Motion draws tried when steering a MOVE object onto a designated grasp location.
    pub align_resamples: u32,
    /// Accepted distance between the steered grasp location and the designated one, m.
    pub align_tolerance: f64,
    /// Steer MOVE objects so the grasp happens at the sampled point. When off,
    /// MOVE objects start at the sampled point and move freely.
    pub align_grasp: bool,
    pub circle_radius: f64,
    pub circle_points: usize,
    /// Upper bound on trajectory slots tried for one dataset.
    pub attempt_cap: u64,
    /// Largest accepted |total - budget| / budget.
    pub budget_tolerance: f64,
}

impl Default for DatagenConfig {
    fn default() -> Self {
        DatagenConfig {
            adc_period: 40,
            max_retries: 5,
            align_resamples: 200,
            align_tolerance: 0.005,
            align_grasp: true,
            circle_radius: 0.18,
            circle_points: 24,
            attempt_cap: 100_000,
            budget_tolerance: 0.05,
        }
    }
}

/// Everything fixed across the trajectories of one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GenContext {
    pub world: WorldConfig,
    pub params: MotionParams,
    pub expert: ExpertConfig,
    pub datagen: DatagenConfig,
}

/// One successful expert demonstration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Configuration at the first step.
    pub config: SpatialConfig,
    pub schedule: AugmentationSchedule,
    pub paradigm: Paradigm,
    pub seed: u64,
    /// Failed rollouts before this one succeeded.
    pub retries: u32,
    pub observations: Vec<[f32; OBS_DIM]>,
    pub actions: Vec<[f32; ACTION_DIM]>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GenerationStats {
    /// Expert rollouts performed.
    pub attempts: u64,
    /// Rollouts that did not end in a placement.
    pub failures: u64,
}

impl GenerationStats {
    pub fn success_rate(&self) -> f64 {
        if self.attempts == 0 {
            return 0.0;
        }
        1.0 - self.failures as f64 / self.attempts as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub paradigm: Paradigm,
    pub sampling: Sampling,
    pub level: RandomizationLevel,
    pub budget: u64,
    pub seed: u64,
    pub world_config_digest: String,
    pub trajectories: Vec<Trajectory>,
    pub stats: GenerationStats,
}

impl Dataset {
    pub fn total_timesteps(&self) -> u64 {
        self.trajectories.iter().map(|t| t.len() as u64).sum()
    }

    pub fn mean_length(&self) -> f64 {
        if self.trajectories.is_empty() {
            return 0.0;
        }
        self.total_timesteps() as f64 / self.trajectories.len() as f64
    }
}

/// Stable digest of a world configuration.
pub fn world_config_digest(cfg: &WorldConfig) -> String {
    let text = serde_json::to_string(cfg).expect("world config serializes");
    format!("{:08x}", crc32fast::hash(text.as_bytes()))
}

/// 3x3 grid at -2/3, 0 and +2/3 of the half-extent around the workspace centre.
pub fn sparse9_points(workspace: &crate::geom::Bounds) -> Vec<Vec2> {
    let c = Vec2::new(
        0.5 * (workspace.min.x + workspace.max.x),
        0.5 * (workspace.min.y + workspace.max.y),
    );
    let (hx, hy) = (workspace.width() / 3.0, workspace.height() / 3.0);
    let mut pts = Vec::with_capacity(9);
    for j in [-1.0, 0.0, 1.0] {
        for i in [-1.0, 0.0, 1.0] {
            pts.push(Vec2::new(c.x + i * hx, c.y + j * hy));
        }
    }
    pts
}

/// `n` points at angles 2*pi*k/n on a circle.
pub fn circle_points(center: Vec2, radius: f64, n: usize) -> Result<Vec<Vec2>> {
    if radius.is_nan() || radius <= 0.0 || n == 0 {
        return Err(Error::Parameter(format!(
            "circle needs radius > 0 and n >= 1 (radius={radius}, n={n})"
        )));
    }
    Ok((0..n)
        .map(|k| center + Vec2::from_angle(2.0 * std::f64::consts::PI * k as f64 / n as f64) * radius)
        .collect())
}

/// Raw outcome of one expert rollout.
#[derive(Debug, Clone)]
pub struct EpisodeRecord {
    pub observations: Vec<[f32; OBS_DIM]>,
    pub actions: Vec<[f32; ACTION_DIM]>,
    pub score: u8,
    /// Object position when the grasp happened.
    pub grasp_location: Option<Vec2>,
    /// True if the object ever bounced off the workspace edge before the grasp.
    pub bounced: bool,
    /// Largest distance of the free object from the origin before the grasp.
    pub max_radius: f64,
}

/// Object teleporting applied by the ADC paradigm.
struct Teleport<'a> {
    period: u32,
    sampling: Sampling,
    anchors: &'a [Vec2],
}

fn rollout_expert<R: Rng + ?Sized>(
    mut world: World,
    expert: &ExpertConfig,
    teleport: Option<&Teleport<'_>>,
    rng: &mut R,
) -> Result<EpisodeRecord> {
    let mut rec = EpisodeRecord {
        observations: Vec::new(),
        actions: Vec::new(),
        score: 0,
        grasp_location: None,
        bounced: false,
        max_radius: world.state.motion.object.pos.norm(),
    };
    while !world.is_terminal() {
        let obs = world.observe();
        let action = expert_action(&world, expert)?;
        rec.observations.push(obs.to_f32());
        rec.actions.push(action.to_array().map(|v| v as f32));
        let before = world.state.motion.object;
        world.step(&action)?;
        let s = &world.state;
        if s.phase == Phase::Pick {
            rec.max_radius = rec.max_radius.max(s.motion.object.pos.norm());
            if s.motion.object.dir != before.dir {
                rec.bounced = true;
            }
        } else if rec.grasp_location.is_none() {
            rec.grasp_location = Some(before.pos);
        }
        if let Some(tp) = teleport {
            if world.state.phase == Phase::Pick && world.state.step_count.is_multiple_of(tp.period) {
                teleport_object(&mut world, tp, rng);
            }
        }
    }
    rec.score = world.score();
    Ok(rec)
}

fn teleport_object<R: Rng + ?Sized>(world: &mut World, tp: &Teleport<'_>, rng: &mut R) {
    let target = world.state.motion.target.pos;
    for _ in 0..100 {
        let pos = match tp.sampling {
            Sampling::DenseUniform => Vec2::new(
                rng.random_range(world.cfg.workspace.min.x..=world.cfg.workspace.max.x),
                rng.random_range(world.cfg.workspace.min.y..=world.cfg.workspace.max.y),
            ),
            Sampling::Sparse9 | Sampling::Circle => tp.anchors[rng.random_range(0..tp.anchors.len())],
        };
        if pos.distance(target) >= world.cfg.min_separation {
            world.state.motion.object.pos = pos;
            world.state.motion.object.heading = random_heading(rng);
            return;
        }
    }
}

/// Rolls out expert episodes with fresh motion draws until one places the
/// object. Returns the trajectory together with the rollout statistics.
pub fn collect_or_retry(
    config: &SpatialConfig,
    schedule: &AugmentationSchedule,
    max_retries: u32,
    ctx: &GenContext,
    seed: u64,
) -> (Result<Trajectory>, GenerationStats) {
    let (found, stats) = retry_loop(max_retries, |retry| {
        let mut rng = stream(seed, &[retry as u64]);
        let world = World::new(ctx.world, ctx.params, *schedule, config, &mut rng)?;
        let rec = rollout_expert(world, &ctx.expert, None, &mut rng)?;
        Ok(Some((*config, rec)))
    });
    let traj = found.map(|(config, rec, retries)| Trajectory {
        config,
        schedule: *schedule,
        paradigm: if schedule.is_static() { Paradigm::Static } else { Paradigm::Move },
        seed,
        retries,
        observations: rec.observations,
        actions: rec.actions,
    });
    (traj, stats)
}

type Found = (SpatialConfig, EpisodeRecord, u32);

/// Runs `attempt` for retries 0.. until it yields an episode with score 3.
/// `Ok(None)` means no rollout could be set up for that retry; it still
/// counts as a failed attempt.
fn retry_loop(
    max_retries: u32,
    mut attempt: impl FnMut(u32) -> Result<Option<(SpatialConfig, EpisodeRecord)>>,
) -> (Result<Found>, GenerationStats) {
    let mut stats = GenerationStats::default();
    if max_retries == 0 {
        return (Err(Error::Parameter("max_retries must be >= 1".into())), stats);
    }
    for retry in 0..max_retries {
        stats.attempts += 1;
        match attempt(retry) {
            Ok(Some((config, rec))) if rec.score == 3 && !rec.observations.is_empty() => {
                return (Ok((config, rec, retry)), stats);
            }
            Ok(_) => stats.failures += 1,
            Err(e) => return (Err(e), stats),
        }
    }
    let err = Error::Generation {
        msg: format!("no successful demonstration in {max_retries} rollouts"),
        attempts: stats.attempts,
        failures: stats.failures,
    };
    (Err(err), stats)
}

/// What to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSpec {
    pub paradigm: Paradigm,
    pub sampling: Sampling,
    pub level: RandomizationLevel,
    pub budget: u64,
    pub seed: u64,
    /// Replaces the full MOVE schedule (ablations).
    pub schedule: Option<AugmentationSchedule>,
}

impl DatasetSpec {
    pub fn new(paradigm: Paradigm, sampling: Sampling, level: RandomizationLevel, budget: u64, seed: u64) -> Self {
        DatasetSpec {
            paradigm,
            sampling,
            level,
            budget,
            seed,
            schedule: None,
        }
    }

    pub fn schedule(&self) -> AugmentationSchedule {
        match self.paradigm {
            Paradigm::Static | Paradigm::Adc => AugmentationSchedule::static_paradigm(),
            Paradigm::Move => self.schedule.unwrap_or_else(AugmentationSchedule::full),
        }
    }
}

/// One trajectory slot: the demonstration (if any) and the rollouts it cost.
struct Slot {
    trajectory: Option<Trajectory>,
    stats: GenerationStats,
}

fn anchors(sampling: Sampling, ctx: &GenContext) -> Result<Vec<Vec2>> {
    match sampling {
        Sampling::Sparse9 => Ok(sparse9_points(&ctx.world.workspace)),
        Sampling::Circle => circle_points(Vec2::ZERO, ctx.datagen.circle_radius, ctx.datagen.circle_points),
        Sampling::DenseUniform => Ok(Vec::new()),
    }
}

/// Initial configuration for slot `index` under a static-style paradigm.
fn slot_config<R: Rng + ?Sized>(
    spec: &DatasetSpec,
    index: u64,
    anchors: &[Vec2],
    ctx: &GenContext,
    rng: &mut R,
) -> Result<SpatialConfig> {
    match spec.sampling {
        Sampling::DenseUniform => randomize_config(spec.level, &ctx.world, rng),
        Sampling::Sparse9 | Sampling::Circle => {
            let p = anchors[(index % anchors.len() as u64) as usize];
            randomize_around(p, spec.level, &ctx.world, rng)
        }
    }
}

/// MOVE rollout whose grasp happens at `anchor` (within the alignment
/// tolerance). Starts are found by fixed-point iteration on the simulated
/// grasp location; circle sampling also requires the free path to stay
/// inside the circle.
fn aligned_move_episode(
    spec: &DatasetSpec,
    anchor: Vec2,
    ctx: &GenContext,
    seed: u64,
) -> Result<Option<(SpatialConfig, EpisodeRecord)>> {
    let schedule = spec.schedule();
    let dg = &ctx.datagen;
    let inside_region = |p: Vec2| match spec.sampling {
        Sampling::Circle => p.norm() <= dg.circle_radius + 1e-12,
        _ => ctx.world.workspace.contains(p),
    };
    for k in 0..dg.align_resamples {
        let mut rng = stream(seed, &[k as u64]);
        let base = randomize_around(anchor, spec.level, &ctx.world, &mut rng)?;
        let template = World::new(ctx.world, ctx.params, schedule, &base, &mut rng)?;
        let mut start = anchor;
        for _ in 0..8 {
            if !inside_region(start) || start.distance(base.target_pos) < ctx.world.min_separation {
                break;
            }
            let mut world = template.clone();
            world.state.motion.object.pos = start;
            let rec = rollout_expert(world, &ctx.expert, None, &mut rng)?;
            let Some(q) = rec.grasp_location else { break };
            let miss = anchor - q;
            if miss.norm() <= dg.align_tolerance {
                let path_ok = !rec.bounced
                    && match spec.sampling {
                        Sampling::Circle => rec.max_radius <= dg.circle_radius + 1e-9,
                        _ => true,
                    };
                if !path_ok {
                    break;
                }
                let config = SpatialConfig {
                    object_pos: start,
                    ..base
                };
                return Ok(Some((config, rec)));
            }
            start += miss;
        }
    }
    Ok(None)
}

fn build_slot(spec: &DatasetSpec, index: u64, anchors: &[Vec2], ctx: &GenContext) -> Result<Slot> {
    let slot_seed = derive_seed(spec.seed, &[index]);
    let schedule = spec.schedule();
    let max_retries = ctx.datagen.max_retries;
    let (found, stats) = match (spec.paradigm, spec.sampling) {
        (Paradigm::Move, Sampling::Sparse9 | Sampling::Circle) if ctx.datagen.align_grasp => {
            let anchor = anchors[(index % anchors.len() as u64) as usize];
            retry_loop(max_retries, |retry| {
                aligned_move_episode(spec, anchor, ctx, derive_seed(slot_seed, &[retry as u64]))
            })
        }
        (Paradigm::Adc, _) => {
            let mut cfg_rng = stream(slot_seed, &[u64::MAX]);
            let config = slot_config(spec, index, anchors, ctx, &mut cfg_rng)?;
            let tp = Teleport {
                period: ctx.datagen.adc_period.max(1),
                sampling: spec.sampling,
                anchors,
            };
            retry_loop(max_retries, |retry| {
                let mut rng = stream(slot_seed, &[retry as u64]);
                let world = World::new(ctx.world, ctx.params, schedule, &config, &mut rng)?;
                let rec = rollout_expert(world, &ctx.expert, Some(&tp), &mut rng)?;
                Ok(Some((config, rec)))
            })
        }
        _ => {
            let mut cfg_rng = stream(slot_seed, &[u64::MAX]);
            let config = slot_config(spec, index, anchors, ctx, &mut cfg_rng)?;
            retry_loop(max_retries, |retry| {
                let mut rng = stream(slot_seed, &[retry as u64]);
                let world = World::new(ctx.world, ctx.params, schedule, &config, &mut rng)?;
                let rec = rollout_expert(world, &ctx.expert, None, &mut rng)?;
                Ok(Some((config, rec)))
            })
        }
    };
    match found {
        Ok((config, rec, retries)) => Ok(Slot {
            trajectory: Some(Trajectory {
                config,
                schedule,
                paradigm: spec.paradigm,
                seed: slot_seed,
                retries,
                observations: rec.observations,
                actions: rec.actions,
            }),
            stats,
        }),
        Err(Error::Generation { .. }) => Ok(Slot {
            trajectory: None,
            stats,
        }),
        Err(e) => Err(e),
    }
}

/// Builds a dataset whose total step count matches `spec.budget`.
///
/// Trajectories are appended in slot order until the total reaches the
/// budget. A trajectory that would overshoot is kept when the overshoot is
/// less than half its length; otherwise it is skipped, and collection stops
/// once the remaining deficit is within the budget tolerance.
pub fn build_dataset(spec: &DatasetSpec, ctx: &GenContext) -> Result<Dataset> {
    if spec.budget < 1000 {
        return Err(Error::Parameter(format!("budget must be >= 1000 steps, got {}", spec.budget)));
    }
    ctx.world.validate()?;
    ctx.params.validate()?;
    let anchors = anchors(spec.sampling, ctx)?;
    let budget = spec.budget;
    let slack = (ctx.datagen.budget_tolerance * budget as f64).floor() as u64;

    let mut trajectories = Vec::new();
    let mut stats = GenerationStats::default();
    let mut total = 0u64;
    let batch = (rayon::current_num_threads() * 4).max(8) as u64;
    let mut next = 0u64;
    'outer: while next < ctx.datagen.attempt_cap {
        let end = (next + batch).min(ctx.datagen.attempt_cap);
        let slots: Vec<Result<Slot>> = (next..end)
            .into_par_iter()
            .map(|i| build_slot(spec, i, &anchors, ctx))
            .collect();
        next = end;
        for slot in slots {
            let slot = slot?;
            stats.attempts += slot.stats.attempts;
            stats.failures += slot.stats.failures;
            let Some(traj) = slot.trajectory else { continue };
            let len = traj.len() as u64;
            if total + len <= budget {
                total += len;
                trajectories.push(traj);
                if total == budget {
                    break 'outer;
                }
                continue;
            }
            let overshoot = total + len - budget;
            if 2 * overshoot < len && overshoot <= slack {
                total += len;
                trajectories.push(traj);
                break 'outer;
            }
            if budget - total <= slack {
                break 'outer;
            }
        }
    }
    if total.abs_diff(budget) > slack {
        return Err(Error::Generation {
            msg: format!("collected {total} of {budget} steps before the attempt cap"),
            attempts: stats.attempts,
            failures: stats.failures,
        });
    }
    Ok(Dataset {
        paradigm: spec.paradigm,
        sampling: spec.sampling,
        level: spec.level,
        budget,
        seed: spec.seed,
        world_config_digest: world_config_digest(&ctx.world),
        trajectories,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse9_grid() {
        let pts = sparse9_points(&crate::geom::Bounds::centered(0.3));
        assert_eq!(pts.len(), 9);
        let has = |x: f64, y: f64| pts.iter().any(|p| (p.x - x).abs() < 1e-12 && (p.y - y).abs() < 1e-12);
        assert!(has(0.0, 0.0));
        assert!(has(-0.2, 0.2));
        assert!(has(0.2, -0.2));
    }

    #[test]
    fn circle_of_four() {
        let r = 0.18;
        let pts = circle_points(Vec2::ZERO, r, 4).unwrap();
        let want = [(r, 0.0), (0.0, r), (-r, 0.0), (0.0, -r)];
        for (p, (x, y)) in pts.iter().zip(want) {
            assert!((p.x - x).abs() < 1e-12 && (p.y - y).abs() < 1e-12);
        }
    }

    #[test]
    fn circle_is_regular() {
        let pts = circle_points(Vec2::new(0.01, -0.02), 0.18, 24).unwrap();
        let d0 = pts[0].distance(pts[1]);
        for k in 0..pts.len() {
            let d = pts[k].distance(pts[(k + 1) % pts.len()]);
            assert!((d - d0).abs() < 1e-12);
        }
        assert!(circle_points(Vec2::ZERO, 0.0, 4).is_err());
        assert!(circle_points(Vec2::ZERO, 0.1, 0).is_err());
    }

    #[test]
    fn trivially_solvable_config_succeeds_first_try() {
        let ctx = GenContext::default();
        let config = SpatialConfig {
            object_pos: ctx.world.gripper_home + Vec2::new(0.0, 0.01),
            object_heading: 0.0,
            target_pos: Vec2::new(0.2, 0.2),
            camera_angle: std::f64::consts::FRAC_PI_2,
            level: RandomizationLevel::ObjectOnly,
        };
        let (traj, stats) = collect_or_retry(&config, &AugmentationSchedule::static_paradigm(), 3, &ctx, 9);
        let traj = traj.unwrap();
        assert_eq!(traj.retries, 0);
        assert_eq!(stats.attempts, 1);
        assert_eq!(stats.failures, 0);
        assert_eq!(traj.paradigm, Paradigm::Static);
    }

    #[test]
    fn impossible_episode_counts_failures() {
        let ctx = GenContext {
            world: WorldConfig {
                step_limit: 3,
                ..WorldConfig::default()
            },
            ..GenContext::default()
        };
        let config = SpatialConfig {
            object_pos: Vec2::new(0.25, 0.25),
            object_heading: 0.0,
            target_pos: Vec2::new(-0.2, -0.2),
            camera_angle: 0.0,
            level: RandomizationLevel::ObjectTarget,
        };
        let (traj, stats) = collect_or_retry(&config, &AugmentationSchedule::static_paradigm(), 4, &ctx, 1);
        assert!(matches!(traj, Err(Error::Generation { attempts: 4, failures: 4, .. })));
        assert_eq!(stats.failures, 4);
    }

    #[test]
    fn small_budget_rejected() {
        let spec = DatasetSpec::new(Paradigm::Static, Sampling::DenseUniform, RandomizationLevel::ObjectOnly, 999, 0);
        assert!(matches!(build_dataset(&spec, &GenContext::default()), Err(Error::Parameter(_))));
    }

    #[test]
    fn overshoot_stays_within_tolerance() {
        let spec = DatasetSpec::new(
            Paradigm::Static,
            Sampling::DenseUniform,
            RandomizationLevel::ObjectTarget,
            1000,
            10326582180502897582,
        );
        let ds = build_dataset(&spec, &GenContext::default()).unwrap();
        assert!(ds.total_timesteps().abs_diff(1000) <= 50);
    }

    #[test]
    fn parse_names() {
        assert_eq!("MOVE".parse::<Paradigm>().unwrap(), Paradigm::Move);
        assert_eq!("dense".parse::<Sampling>().unwrap(), Sampling::DenseUniform);
        assert!("bogus".parse::<Sampling>().is_err());
    }
}
