//! Diffusion policy over short action chunks, plus a direct-regression
//! baseline with the same inputs and outputs.
//!
//! The denoiser sees the noisy normalized chunk, the normalized observation
//! history and a sinusoidal embedding of the timestep, and predicts the
//! noise. Inference starts from a standard normal chunk and runs a strided
//! DDIM chain. Execution is receding-horizon: of every predicted chunk only
//! the first `action` steps are played before replanning.

pub mod checkpoint;
pub mod diffusion;

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::datagen::Dataset;
use crate::error::{Error, Result};
use crate::nn::{mse_loss, AdamConfig, AdamState, Mlp, ParameterStore};
use crate::rng::{self, Stream};
use crate::world::{Action, EventLog, Observation, World, ACTION_DIM, OBS_DIM};

pub use checkpoint::{read_checkpoint, read_checkpoint_bytes, write_checkpoint, write_checkpoint_bytes};
pub use diffusion::{ddim_step, ddim_update, forward_noise, timestep_embedding, NoiseSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Horizons {
    /// Actions predicted per chunk.
    pub prediction: usize,
    /// Leading actions executed before replanning.
    pub action: usize,
    /// Observations the policy is conditioned on.
    pub observation: usize,
}

impl Default for Horizons {
    fn default() -> Self {
        Horizons {
            prediction: 4,
            action: 3,
            observation: 2,
        }
    }
}

impl Horizons {
    pub fn validate(&self) -> Result<()> {
        if self.action < 1 || self.action > self.prediction || self.observation < 1 {
            return Err(Error::Parameter(format!(
                "need 1 <= action <= prediction and observation >= 1, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn obs_len(&self) -> usize {
        self.observation * OBS_DIM
    }

    pub fn chunk_len(&self) -> usize {
        self.prediction * ACTION_DIM
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Diffusion,
    Bc,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Diffusion => "diffusion",
            PolicyKind::Bc => "bc",
        }
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diffusion" => Ok(PolicyKind::Diffusion),
            "bc" => Ok(PolicyKind::Bc),
            _ => Err(Error::Config(format!("unknown policy '{s}' (expected diffusion or bc)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub steps: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub hidden: Vec<usize>,
    pub time_embed_dim: usize,
    pub diffusion_steps: usize,
    pub inference_steps: usize,
    pub horizons: Horizons,
    /// Clip the implied clean chunk to the normalized range while sampling.
    pub clip_sample: bool,
    /// Decay of the weight average kept for inference; 0 disables it.
    pub ema_decay: f64,
    /// Cosine-decay the learning rate to zero after a linear warm-up.
    pub cosine_lr: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            steps: 30_000,
            batch_size: 128,
            lr: 1e-3,
            hidden: vec![256, 256],
            time_embed_dim: 32,
            diffusion_steps: 100,
            inference_steps: 10,
            horizons: Horizons::default(),
            clip_sample: true,
            ema_decay: 0.0,
            cosine_lr: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.horizons.validate()?;
        if self.steps == 0 || self.batch_size == 0 {
            return Err(Error::Parameter("training needs at least one step and one sample per batch".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Parameter(format!("learning rate must be positive, got {}", self.lr)));
        }
        if !self.time_embed_dim.is_multiple_of(2) {
            return Err(Error::Parameter("timestep embedding size must be even".into()));
        }
        if self.inference_steps < 1 || self.inference_steps > self.diffusion_steps {
            return Err(Error::Parameter("inference steps must lie in [1, diffusion steps]".into()));
        }
        if !(0.0..1.0).contains(&self.ema_decay) {
            return Err(Error::Parameter("EMA decay must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Per-dimension min-max scaling onto [-1, 1]. Constant dimensions map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub obs_min: Vec<f64>,
    pub obs_max: Vec<f64>,
    pub act_min: Vec<f64>,
    pub act_max: Vec<f64>,
}

const MIN_RANGE: f64 = 1e-9;

fn to_unit(x: f64, lo: f64, hi: f64) -> f64 {
    if hi - lo < MIN_RANGE {
        0.0
    } else {
        2.0 * (x - lo) / (hi - lo) - 1.0
    }
}

fn from_unit(u: f64, lo: f64, hi: f64) -> f64 {
    if hi - lo < MIN_RANGE {
        lo
    } else {
        lo + (u + 1.0) * 0.5 * (hi - lo)
    }
}

impl Normalizer {
    pub fn fit(dataset: &Dataset) -> Result<Self> {
        if dataset.trajectories.iter().all(|t| t.is_empty()) {
            return Err(Error::Parameter("dataset has no timesteps".into()));
        }
        let mut n = Normalizer {
            obs_min: vec![f64::INFINITY; OBS_DIM],
            obs_max: vec![f64::NEG_INFINITY; OBS_DIM],
            act_min: vec![f64::INFINITY; ACTION_DIM],
            act_max: vec![f64::NEG_INFINITY; ACTION_DIM],
        };
        for t in &dataset.trajectories {
            for o in &t.observations {
                for (d, &v) in o.iter().enumerate() {
                    n.obs_min[d] = n.obs_min[d].min(v as f64);
                    n.obs_max[d] = n.obs_max[d].max(v as f64);
                }
            }
            for a in &t.actions {
                for (d, &v) in a.iter().enumerate() {
                    n.act_min[d] = n.act_min[d].min(v as f64);
                    n.act_max[d] = n.act_max[d].max(v as f64);
                }
            }
        }
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.obs_min.len() == OBS_DIM
            && self.obs_max.len() == OBS_DIM
            && self.act_min.len() == ACTION_DIM
            && self.act_max.len() == ACTION_DIM;
        if !ok {
            return Err(Error::Shape("normalization stats do not cover every dimension".into()));
        }
        Ok(())
    }

    pub fn obs(&self, d: usize, x: f64) -> f64 {
        to_unit(x, self.obs_min[d], self.obs_max[d])
    }

    pub fn act(&self, d: usize, x: f64) -> f64 {
        to_unit(x, self.act_min[d], self.act_max[d])
    }

    pub fn obs_inverse(&self, d: usize, u: f64) -> f64 {
        from_unit(u, self.obs_min[d], self.obs_max[d])
    }

    pub fn act_inverse(&self, d: usize, u: f64) -> f64 {
        from_unit(u, self.act_min[d], self.act_max[d])
    }

    /// Normalized, flattened observation history.
    pub fn history(&self, history: &[Observation]) -> Vec<f64> {
        history
            .iter()
            .flat_map(|o| o.0.iter().enumerate().map(|(d, &v)| self.obs(d, v)))
            .collect()
    }
}

/// Bookkeeping stored alongside trained weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub steps: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub final_loss: f64,
    pub dataset_digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyCheckpoint {
    pub kind: PolicyKind,
    pub net: Mlp,
    pub params: ParameterStore<f32>,
    pub schedule: NoiseSchedule,
    pub normalizer: Normalizer,
    pub horizons: Horizons,
    pub inference_steps: usize,
    pub time_embed_dim: usize,
    pub clip_sample: bool,
    pub meta: TrainMeta,
}

impl PolicyCheckpoint {
    pub fn validate(&self) -> Result<()> {
        self.horizons.validate()?;
        self.normalizer.validate()?;
        self.net.check(&self.params)?;
        let (din, dout) = (self.net.input_dim(), self.net.output_dim());
        let (want_in, want_out) = network_io(self.kind, &self.horizons, self.time_embed_dim);
        if din != want_in || dout != want_out {
            return Err(Error::Shape(format!(
                "network is {din} -> {dout}, horizons need {want_in} -> {want_out}"
            )));
        }
        if self.inference_steps < 1 || self.inference_steps > self.schedule.steps() {
            return Err(Error::Parameter("inference steps must lie in [1, diffusion steps]".into()));
        }
        Ok(())
    }
}

fn network_io(kind: PolicyKind, h: &Horizons, embed: usize) -> (usize, usize) {
    match kind {
        PolicyKind::Diffusion => (h.chunk_len() + h.obs_len() + embed, h.chunk_len()),
        PolicyKind::Bc => (h.obs_len(), h.chunk_len()),
    }
}

/// Flattened, normalized (history, chunk) pairs for every dataset timestep.
///
/// Histories reaching before the first step repeat the first observation;
/// chunks running past the end repeat the last action.
#[derive(Debug, Clone)]
pub struct Samples {
    pub obs: Vec<f32>,
    pub chunks: Vec<f32>,
    pub obs_len: usize,
    pub chunk_len: usize,
}

impl Samples {
    pub fn build(dataset: &Dataset, norm: &Normalizer, h: &Horizons) -> Self {
        let (obs_len, chunk_len) = (h.obs_len(), h.chunk_len());
        let mut obs = Vec::new();
        let mut chunks = Vec::new();
        for t in &dataset.trajectories {
            let n = t.len();
            for i in 0..n {
                for k in 0..h.observation {
                    let j = (i + k + 1).saturating_sub(h.observation);
                    for (d, &v) in t.observations[j].iter().enumerate() {
                        obs.push(norm.obs(d, v as f64) as f32);
                    }
                }
                for k in 0..h.prediction {
                    let j = (i + k).min(n - 1);
                    for (d, &v) in t.actions[j].iter().enumerate() {
                        chunks.push(norm.act(d, v as f64) as f32);
                    }
                }
            }
        }
        Samples {
            obs,
            chunks,
            obs_len,
            chunk_len,
        }
    }

    pub fn len(&self) -> usize {
        self.obs.len() / self.obs_len
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }
}

/// Loss trace of a training run.
#[derive(Debug, Clone, Default)]
pub struct TrainLog {
    /// (step, mean loss over the preceding logging window).
    pub losses: Vec<(usize, f64)>,
}

const LOG_EVERY: usize = 500;

fn init_net(kind: PolicyKind, cfg: &TrainConfig, rng: &mut Stream) -> Result<(Mlp, ParameterStore<f32>)> {
    let (din, dout) = network_io(kind, &cfg.horizons, cfg.time_embed_dim);
    let mut dims = vec![din];
    dims.extend(&cfg.hidden);
    dims.push(dout);
    let net = Mlp::new(dims)?;
    let params = net.init(rng);
    Ok((net, params))
}

/// Digest of the dataset content that a checkpoint was trained on.
pub fn dataset_digest(dataset: &Dataset) -> String {
    let mut h = crc32fast::Hasher::new();
    for t in &dataset.trajectories {
        for o in &t.observations {
            for v in o {
                h.update(&v.to_le_bytes());
            }
        }
        for a in &t.actions {
            for v in a {
                h.update(&v.to_le_bytes());
            }
        }
    }
    format!("{:08x}", h.finalize())
}

/// Trains a diffusion denoiser on `dataset`.
pub fn train(dataset: &Dataset, cfg: &TrainConfig) -> Result<(PolicyCheckpoint, TrainLog)> {
    train_kind(PolicyKind::Diffusion, dataset, cfg)
}

/// Trains the direct-regression baseline on `dataset`.
pub fn train_bc_baseline(dataset: &Dataset, cfg: &TrainConfig) -> Result<(PolicyCheckpoint, TrainLog)> {
    train_kind(PolicyKind::Bc, dataset, cfg)
}

pub fn train_kind(kind: PolicyKind, dataset: &Dataset, cfg: &TrainConfig) -> Result<(PolicyCheckpoint, TrainLog)> {
    cfg.validate()?;
    let normalizer = Normalizer::fit(dataset)?;
    let samples = Samples::build(dataset, &normalizer, &cfg.horizons);
    let schedule = NoiseSchedule::cosine(cfg.diffusion_steps)?;
    let mut rng = rng::stream(cfg.seed, &[0x7472_6169]);
    let (net, mut params) = init_net(kind, cfg, &mut rng)?;
    let log = fit(kind, &net, &mut params, &samples, &schedule, cfg, &mut rng)?;
    let final_loss = log.losses.last().map_or(f64::NAN, |&(_, l)| l);
    let ckpt = PolicyCheckpoint {
        kind,
        net,
        params,
        schedule,
        normalizer,
        horizons: cfg.horizons,
        inference_steps: cfg.inference_steps,
        time_embed_dim: cfg.time_embed_dim,
        clip_sample: cfg.clip_sample,
        meta: TrainMeta {
            steps: cfg.steps,
            batch_size: cfg.batch_size,
            lr: cfg.lr,
            seed: cfg.seed,
            final_loss,
            dataset_digest: dataset_digest(dataset),
        },
    };
    Ok((ckpt, log))
}

/// Runs the optimizer over `samples`; exposed for custom sample sets.
pub fn fit(
    kind: PolicyKind,
    net: &Mlp,
    params: &mut ParameterStore<f32>,
    samples: &Samples,
    schedule: &NoiseSchedule,
    cfg: &TrainConfig,
    rng: &mut Stream,
) -> Result<TrainLog> {
    if samples.is_empty() {
        return Err(Error::Parameter("no training samples".into()));
    }
    let (obs_len, chunk_len) = (samples.obs_len, samples.chunk_len);
    let din = net.input_dim();
    let b = cfg.batch_size;
    let embeds: Vec<Vec<f32>> = (0..=schedule.steps())
        .map(|t| timestep_embedding(t, cfg.time_embed_dim).into_iter().map(|v| v as f32).collect())
        .collect();
    let sqrt_ab: Vec<(f32, f32)> = schedule
        .values()
        .iter()
        .map(|&a| (a.sqrt() as f32, (1.0 - a).sqrt() as f32))
        .collect();
    let mut adam = AdamConfig {
        lr: cfg.lr,
        ..AdamConfig::default()
    };
    let warmup = (cfg.steps / 20).min(500);
    let mut opt = AdamState::new(params);
    let mut ema = (cfg.ema_decay > 0.0).then(|| params.clone());
    let mut input = vec![0f32; b * din];
    let mut target = vec![0f32; b * chunk_len];
    let mut log = TrainLog::default();
    let mut window = 0.0;
    let mut window_n = 0usize;
    for step in 1..=cfg.steps {
        for row in 0..b {
            let i = rng.random_range(0..samples.len());
            let obs = &samples.obs[i * obs_len..(i + 1) * obs_len];
            let x0 = &samples.chunks[i * chunk_len..(i + 1) * chunk_len];
            let inp = &mut input[row * din..(row + 1) * din];
            let tgt = &mut target[row * chunk_len..(row + 1) * chunk_len];
            match kind {
                PolicyKind::Diffusion => {
                    let t = rng.random_range(1..=schedule.steps());
                    let (a, s) = sqrt_ab[t];
                    for k in 0..chunk_len {
                        let e: f32 = rng.sample(StandardNormal);
                        tgt[k] = e;
                        inp[k] = a * x0[k] + s * e;
                    }
                    inp[chunk_len..chunk_len + obs_len].copy_from_slice(obs);
                    inp[chunk_len + obs_len..].copy_from_slice(&embeds[t]);
                }
                PolicyKind::Bc => {
                    inp.copy_from_slice(obs);
                    tgt.copy_from_slice(x0);
                }
            }
        }
        let (pred, cache) = net.forward(params, &input, b)?;
        let (loss, grad) = mse_loss(&pred, &target)?;
        if !loss.is_finite() {
            return Err(Error::Training(format!("non-finite loss at step {step}")));
        }
        let grads = net.backward(params, &cache, &grad)?;
        if cfg.cosine_lr {
            adam.lr = if step <= warmup {
                cfg.lr * step as f64 / warmup as f64
            } else {
                let p = (step - warmup) as f64 / (cfg.steps - warmup).max(1) as f64;
                cfg.lr * 0.5 * (1.0 + (std::f64::consts::PI * p).cos())
            };
        }
        opt.update(params, &grads, &adam)
            .map_err(|e| Error::Training(format!("step {step}: {e}")))?;
        if let Some(avg) = ema.as_mut() {
            let d = cfg.ema_decay.min((1.0 + step as f64) / (10.0 + step as f64)) as f32;
            avg.blend(params, d);
        }
        window += loss as f64;
        window_n += 1;
        if step % LOG_EVERY == 0 || step == cfg.steps {
            log.losses.push((step, window / window_n as f64));
            window = 0.0;
            window_n = 0;
        }
    }
    if let Some(avg) = ema {
        *params = avg;
    }
    Ok(log)
}

/// Denoises one chunk per history row. `noise` holds the starting draws.
/// `eps_fn` maps `(x_t rows, t)` to predicted noise rows; the network is the
/// usual choice but tests substitute an oracle.
pub fn ddim_chain(
    schedule: &NoiseSchedule,
    inference_steps: usize,
    clip: bool,
    mut x: Vec<f64>,
    mut eps_fn: impl FnMut(&[f64], usize) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    for (t, t_prev) in schedule.strided(inference_steps)? {
        let mut eps = eps_fn(&x, t)?;
        if eps.len() != x.len() {
            return Err(Error::Shape("denoiser output does not match the sample".into()));
        }
        let ab = schedule.alpha_bar(t);
        if clip {
            let (a, s) = (ab.sqrt(), (1.0 - ab).sqrt());
            for (e, &xi) in eps.iter_mut().zip(&x) {
                let x0 = ((xi - s * *e) / a).clamp(-1.0, 1.0);
                *e = (xi - a * x0) / s;
            }
        }
        x = ddim_step(&x, t, t_prev, &eps, schedule);
    }
    Ok(x)
}

impl PolicyCheckpoint {
    /// Network input rows for noisy chunks `x` at timestep `t`.
    fn denoiser_input(&self, x: &[f64], obs: &[f64], t: usize, rows: usize) -> Vec<f32> {
        let (cl, ol) = (self.horizons.chunk_len(), self.horizons.obs_len());
        let emb = timestep_embedding(t, self.time_embed_dim);
        let mut input = Vec::with_capacity(rows * self.net.input_dim());
        for r in 0..rows {
            input.extend(x[r * cl..(r + 1) * cl].iter().map(|&v| v as f32));
            input.extend(obs[r * ol..(r + 1) * ol].iter().map(|&v| v as f32));
            input.extend(emb.iter().map(|&v| v as f32));
        }
        input
    }

    /// Normalized chunks for a batch of normalized histories, one rng each.
    pub fn sample_normalized(&self, obs: &[f64], rngs: &mut [&mut Stream]) -> Result<Vec<f64>> {
        let rows = rngs.len();
        let (cl, ol) = (self.horizons.chunk_len(), self.horizons.obs_len());
        if obs.len() != rows * ol {
            return Err(Error::Shape(format!(
                "observation history has {} values, expected {rows} x {ol}",
                obs.len()
            )));
        }
        match self.kind {
            PolicyKind::Bc => {
                let input: Vec<f32> = obs.iter().map(|&v| v as f32).collect();
                let out = self.net.predict(&self.params, &input, rows)?;
                Ok(out.into_iter().map(|v| v as f64).collect())
            }
            PolicyKind::Diffusion => {
                let mut x = Vec::with_capacity(rows * cl);
                for r in rngs.iter_mut() {
                    for _ in 0..cl {
                        x.push(r.sample::<f64, _>(StandardNormal));
                    }
                }
                ddim_chain(&self.schedule, self.inference_steps, self.clip_sample, x, |x, t| {
                    let input = self.denoiser_input(x, obs, t, rows);
                    let out = self.net.predict(&self.params, &input, rows)?;
                    Ok(out.into_iter().map(|v| v as f64).collect())
                })
            }
        }
    }

    /// Denormalizes and clamps a normalized chunk into executable actions.
    pub fn decode_chunk(&self, chunk: &[f64]) -> Vec<Action> {
        chunk
            .chunks_exact(ACTION_DIM)
            .map(|a| {
                let v: Vec<f64> = a
                    .iter()
                    .enumerate()
                    .map(|(d, &u)| self.normalizer.act_inverse(d, u))
                    .collect();
                Action::from_slice(&v).clamped()
            })
            .collect()
    }
}

/// Predicts one full chunk (`prediction` actions) for a single history.
pub fn sample_action_chunk(ckpt: &PolicyCheckpoint, history: &[Observation], rng: &mut Stream) -> Result<Vec<Action>> {
    if history.len() != ckpt.horizons.observation {
        return Err(Error::Shape(format!(
            "history has {} observations, policy expects {}",
            history.len(),
            ckpt.horizons.observation
        )));
    }
    let obs = ckpt.normalizer.history(history);
    let chunk = ckpt.sample_normalized(&obs, &mut [rng])?;
    Ok(ckpt.decode_chunk(&chunk))
}

/// One episode awaiting a plan.
pub struct PlanRequest<'a> {
    pub world: &'a World,
    pub history: &'a [Observation],
    pub rng: &'a mut Stream,
}

/// Anything that can drive the gripper: learned checkpoints, the scripted
/// expert, baselines.
pub trait Planner: Sync {
    /// Observations of history each plan is conditioned on.
    fn obs_horizon(&self) -> usize {
        1
    }

    /// Action sequences to play, one per request; each must be non-empty.
    fn plan_batch(&self, requests: &mut [PlanRequest<'_>]) -> Result<Vec<Vec<Action>>>;
}

impl Planner for PolicyCheckpoint {
    fn obs_horizon(&self) -> usize {
        self.horizons.observation
    }

    fn plan_batch(&self, requests: &mut [PlanRequest<'_>]) -> Result<Vec<Vec<Action>>> {
        let obs: Vec<f64> = requests
            .iter()
            .flat_map(|r| self.normalizer.history(r.history))
            .collect();
        let mut rngs: Vec<&mut Stream> = requests.iter_mut().map(|r| &mut *r.rng).collect();
        let chunks = self.sample_normalized(&obs, &mut rngs)?;
        Ok(chunks
            .chunks_exact(self.horizons.chunk_len())
            .map(|c| self.decode_chunk(c).into_iter().take(self.horizons.action).collect())
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeOutcome {
    pub score: u8,
    pub events: EventLog,
    pub steps: u32,
}

impl EpisodeOutcome {
    pub fn success(&self) -> bool {
        self.score == 3
    }
}

/// Runs one episode under receding-horizon control.
pub fn rollout(planner: &dyn Planner, world: World, max_steps: u32, rng: Stream) -> Result<EpisodeOutcome> {
    Ok(rollout_batch(planner, vec![world], max_steps, vec![rng])?.remove(0))
}

/// Runs many episodes in lockstep so planning is batched across them. Each
/// episode draws only from its own stream, so outcomes do not depend on the
/// batch composition.
pub fn rollout_batch(
    planner: &dyn Planner,
    mut worlds: Vec<World>,
    max_steps: u32,
    mut rngs: Vec<Stream>,
) -> Result<Vec<EpisodeOutcome>> {
    if worlds.len() != rngs.len() {
        return Err(Error::Parameter("one random stream per episode is required".into()));
    }
    let n = worlds.len();
    let h = planner.obs_horizon().max(1);
    let mut histories: Vec<VecDeque<Observation>> = worlds
        .iter()
        .map(|w| std::iter::repeat_n(w.observe(), h).collect())
        .collect();
    let mut queues: Vec<VecDeque<Action>> = vec![VecDeque::new(); n];
    let mut active: Vec<bool> = worlds
        .iter()
        .map(|w| max_steps > 0 && !w.is_terminal())
        .collect();
    while active.iter().any(|&a| a) {
        let needs: Vec<usize> = (0..n).filter(|&i| active[i] && queues[i].is_empty()).collect();
        if !needs.is_empty() {
            let hist: Vec<Vec<Observation>> = needs
                .iter()
                .map(|&i| histories[i].iter().copied().collect())
                .collect();
            let plans = {
                let mut rng_refs: Vec<Option<&mut Stream>> = rngs.iter_mut().map(Some).collect();
                let mut requests: Vec<PlanRequest<'_>> = needs
                    .iter()
                    .zip(&hist)
                    .map(|(&i, hh)| PlanRequest {
                        world: &worlds[i],
                        history: hh,
                        rng: rng_refs[i].take().unwrap(),
                    })
                    .collect();
                planner.plan_batch(&mut requests)?
            };
            if plans.len() != needs.len() || plans.iter().any(|p| p.is_empty()) {
                return Err(Error::State("planner returned no actions for an episode".into()));
            }
            for (&i, plan) in needs.iter().zip(plans) {
                queues[i].extend(plan);
            }
        }
        for i in 0..n {
            if !active[i] {
                continue;
            }
            let a = queues[i].pop_front().expect("queue filled above");
            worlds[i].step(&a)?;
            histories[i].pop_front();
            histories[i].push_back(worlds[i].observe());
            if worlds[i].is_terminal() || worlds[i].state.step_count >= max_steps {
                active[i] = false;
            }
        }
    }
    Ok(worlds
        .into_iter()
        .map(|w| EpisodeOutcome {
            score: w.score(),
            events: w.state.events,
            steps: w.state.step_count,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizons_validate() {
        assert!(Horizons::default().validate().is_ok());
        let bad = Horizons {
            prediction: 2,
            action: 3,
            observation: 1,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn unit_scaling_round_trip() {
        for &(lo, hi) in &[(-0.3, 0.3), (0.0, 1.0), (-2.0, 5.0)] {
            for &x in &[lo, hi, 0.5 * (lo + hi), lo + 0.1 * (hi - lo)] {
                let u = to_unit(x, lo, hi);
                assert!((-1.0..=1.0).contains(&u));
                assert!((from_unit(u, lo, hi) - x).abs() < 1e-12);
            }
        }
        assert_eq!(to_unit(0.2, 0.2, 0.2), 0.0);
        assert_eq!(from_unit(0.7, 0.2, 0.2), 0.2);
    }

    #[test]
    fn chain_with_true_noise_recovers_x0() {
        let s = NoiseSchedule::cosine(100).unwrap();
        let x0 = vec![0.5, -0.25, 0.9, -1.0];
        let eps = vec![1.2, -0.3, 0.05, 2.2];
        let xt = forward_noise(&x0, 100, &eps, &s).unwrap();
        let out = ddim_chain(&s, 10, false, xt, |x, t| {
            // noise consistent with x0 at the current x_t
            let ab = s.alpha_bar(t);
            Ok(x.iter().zip(&x0).map(|(&xi, &a)| (xi - ab.sqrt() * a) / (1.0 - ab).sqrt()).collect())
        })
        .unwrap();
        for (a, b) in out.iter().zip(&x0) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
