//! Spatial-generalization measurement.
//!
//! [`eval_grid`] pins the object start at the centre of every cell of a
//! uniform grid over the workspace, randomizes the remaining factors for the
//! requested level and scores rollouts of a [`Planner`] in static scenes.
//! [`compare`] builds, trains and evaluates whole experiment suites.

pub mod compare;
pub mod report;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expert::{expert_action, ExpertConfig};
use crate::geom::{Bounds, Vec2};
use crate::policy::{rollout_batch, EpisodeOutcome, PlanRequest, Planner, PolicyCheckpoint};
use crate::rng;
use crate::world::{randomize_around, Action, RandomizationLevel, World, WorldConfig};

pub use compare::{run_comparison, write_comparison, ComparisonConfig, ComparisonReport, Experiment, Runner};
pub use report::{read_summary, write_report};

/// Episodes rolled out together per planning batch.
const EPISODE_BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: usize,
    pub episodes_per_cell: usize,
    pub level: RandomizationLevel,
    pub seed: u64,
}

impl GridSpec {
    pub fn new(resolution: usize, episodes_per_cell: usize, level: RandomizationLevel, seed: u64) -> Self {
        GridSpec {
            resolution,
            episodes_per_cell,
            level,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 || self.episodes_per_cell < 1 {
            return Err(Error::Parameter(format!(
                "grid needs resolution >= 2 and >= 1 episode per cell, got {} / {}",
                self.resolution, self.episodes_per_cell
            )));
        }
        Ok(())
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::new(13, 3, RandomizationLevel::ObjectOnly, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub x: f64,
    pub y: f64,
    pub attempts: u32,
    pub successes: u32,
    pub total_score: u32,
}

impl CellResult {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.attempts.max(1) as f64
    }

    pub fn normalized_score(&self) -> f64 {
        self.total_score as f64 / (3.0 * self.attempts.max(1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub workspace: Bounds,
    pub grid: GridSpec,
    /// Row-major from the low-y row, low-x first.
    pub cells: Vec<CellResult>,
    pub success_rate: f64,
    pub normalized_score: f64,
    pub policy_digest: String,
    pub dataset_digest: String,
}

impl EvalReport {
    /// Success rate restricted to cells selected by `keep`.
    pub fn success_where(&self, keep: impl Fn(&CellResult) -> bool) -> Option<f64> {
        let (s, a) = self
            .cells
            .iter()
            .filter(|c| keep(c))
            .fold((0u64, 0u64), |(s, a), c| (s + c.successes as u64, a + c.attempts as u64));
        (a > 0).then(|| s as f64 / a as f64)
    }
}

/// Total score over `3 x` episodes.
pub fn normalized_score(report: &EvalReport) -> Result<f64> {
    normalized_score_of(&report.cells)
}

pub fn normalized_score_of(cells: &[CellResult]) -> Result<f64> {
    let attempts: u64 = cells.iter().map(|c| c.attempts as u64).sum();
    if attempts == 0 {
        return Err(Error::Parameter("normalized score of zero episodes".into()));
    }
    let score: u64 = cells.iter().map(|c| c.total_score as u64).sum();
    Ok(score as f64 / (3.0 * attempts as f64))
}

/// Centres of a `resolution x resolution` grid over `bounds`, row-major
/// from the low-y row.
pub fn cell_centers(bounds: &Bounds, resolution: usize) -> Vec<Vec2> {
    let (w, h) = (bounds.width() / resolution as f64, bounds.height() / resolution as f64);
    (0..resolution)
        .flat_map(|j| {
            (0..resolution).map(move |i| {
                Vec2::new(
                    bounds.min.x + (i as f64 + 0.5) * w,
                    bounds.min.y + (j as f64 + 0.5) * h,
                )
            })
        })
        .collect()
}

/// Scripted expert as a planner; replans every step.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpertPlanner(pub ExpertConfig);

impl Planner for ExpertPlanner {
    fn plan_batch(&self, requests: &mut [PlanRequest<'_>]) -> Result<Vec<Vec<Action>>> {
        requests
            .iter()
            .map(|r| Ok(vec![expert_action(r.world, &self.0)?]))
            .collect()
    }
}

/// Uniform random commands.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPlanner;

impl Planner for RandomPlanner {
    fn plan_batch(&self, requests: &mut [PlanRequest<'_>]) -> Result<Vec<Vec<Action>>> {
        Ok(requests
            .iter_mut()
            .map(|r| {
                let vx = r.rng.random_range(-1.0..=1.0);
                let vy = r.rng.random_range(-1.0..=1.0);
                let g = r.rng.random_range(0.0..=1.0);
                vec![Action::new(vx, vy, g)]
            })
            .collect())
    }
}

/// Digest used in reports for checkpoint-backed planners.
pub fn checkpoint_digest(ckpt: &PolicyCheckpoint) -> String {
    format!("{:08x}", crc32fast::hash(&ckpt.params.to_le_bytes()))
}

/// Evaluates `planner` on every grid cell. Each episode's scene and planner
/// noise come from streams derived from (seed, cell, episode), so results
/// do not depend on thread count.
pub fn eval_grid(planner: &dyn Planner, cfg: &WorldConfig, grid: &GridSpec) -> Result<EvalReport> {
    eval_grid_tagged(planner, cfg, grid, "n/a", "n/a")
}

pub fn eval_grid_tagged(
    planner: &dyn Planner,
    cfg: &WorldConfig,
    grid: &GridSpec,
    policy_digest: &str,
    dataset_digest: &str,
) -> Result<EvalReport> {
    grid.validate()?;
    cfg.validate()?;
    let centers = cell_centers(&cfg.workspace, grid.resolution);
    let episodes: Vec<(usize, usize)> = (0..centers.len())
        .flat_map(|c| (0..grid.episodes_per_cell).map(move |e| (c, e)))
        .collect();
    let batches: Vec<&[(usize, usize)]> = episodes.chunks(EPISODE_BATCH).collect();
    let outcomes: Vec<Vec<EpisodeOutcome>> = batches
        .par_iter()
        .map(|batch| {
            let mut worlds = Vec::with_capacity(batch.len());
            let mut rngs = Vec::with_capacity(batch.len());
            for &(c, e) in batch.iter() {
                let mut scene = rng::stream(grid.seed, &[c as u64, e as u64, 0]);
                let config = randomize_around(centers[c], grid.level, cfg, &mut scene)?;
                worlds.push(World::fixed(*cfg, &config));
                rngs.push(rng::stream(grid.seed, &[c as u64, e as u64, 1]));
            }
            rollout_batch(planner, worlds, cfg.step_limit, rngs)
        })
        .collect::<Result<_>>()?;
    let mut cells: Vec<CellResult> = centers
        .iter()
        .map(|p| CellResult {
            x: p.x,
            y: p.y,
            attempts: 0,
            successes: 0,
            total_score: 0,
        })
        .collect();
    for (&(c, _), o) in episodes.iter().zip(outcomes.iter().flatten()) {
        let cell = &mut cells[c];
        cell.attempts += 1;
        cell.successes += o.success() as u32;
        cell.total_score += o.score as u32;
    }
    let attempts: u64 = cells.iter().map(|c| c.attempts as u64).sum();
    let successes: u64 = cells.iter().map(|c| c.successes as u64).sum();
    Ok(EvalReport {
        workspace: cfg.workspace,
        grid: *grid,
        success_rate: successes as f64 / attempts as f64,
        normalized_score: normalized_score_of(&cells)?,
        cells,
        policy_digest: policy_digest.to_string(),
        dataset_digest: dataset_digest.to_string(),
    })
}

/// [`eval_grid`] for a trained checkpoint, with digests filled in.
pub fn eval_checkpoint(ckpt: &PolicyCheckpoint, cfg: &WorldConfig, grid: &GridSpec) -> Result<EvalReport> {
    eval_grid_tagged(ckpt, cfg, grid, &checkpoint_digest(ckpt), &ckpt.meta.dataset_digest)
}
