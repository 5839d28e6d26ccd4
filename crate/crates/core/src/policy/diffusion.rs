//! Noise schedule, forward noising and the deterministic DDIM update.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const COSINE_OFFSET: f64 = 0.008;
const MIN_ALPHA_BAR: f64 = 1e-5;

/// Cumulative signal-retention products `alpha_bar[t]`, `t = 0..=T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSchedule {
    alpha_bar: Vec<f64>,
}

impl NoiseSchedule {
    /// Cosine schedule with offset `s = 0.008`, clamped below at `1e-5`.
    pub fn cosine(steps: usize) -> Result<Self> {
        if steps < 1 {
            return Err(Error::Parameter("noise schedule needs at least one step".into()));
        }
        let s = COSINE_OFFSET;
        let f = |t: usize| {
            let c = ((t as f64 / steps as f64 + s) / (1.0 + s) * FRAC_PI_2).cos();
            c * c
        };
        let f0 = f(0);
        let alpha_bar = (0..=steps)
            .map(|t| (f(t) / f0).clamp(MIN_ALPHA_BAR, 1.0))
            .collect();
        Ok(NoiseSchedule { alpha_bar })
    }

    /// Schedule from explicit values; checked for the schedule invariants.
    pub fn from_alpha_bar(alpha_bar: Vec<f64>) -> Result<Self> {
        let ok = alpha_bar.len() >= 2
            && alpha_bar[0] == 1.0
            && alpha_bar.iter().all(|&a| a > 0.0 && a <= 1.0)
            && alpha_bar.windows(2).all(|w| w[1] < w[0]);
        if !ok {
            return Err(Error::Parameter("alpha_bar must start at 1 and decrease strictly in (0, 1]".into()));
        }
        Ok(NoiseSchedule { alpha_bar })
    }

    /// Number of training diffusion steps `T`.
    pub fn steps(&self) -> usize {
        self.alpha_bar.len() - 1
    }

    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bar[t]
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha_bar
    }

    /// `n` evenly strided timesteps from `T` down, each paired with the
    /// timestep it steps to; the last pair ends at 0.
    pub fn strided(&self, n: usize) -> Result<Vec<(usize, usize)>> {
        let t = self.steps();
        if n < 1 || n > t {
            return Err(Error::Parameter(format!("cannot stride {t} diffusion steps into {n}")));
        }
        let ts: Vec<usize> = (0..n).map(|i| t - i * t / n).collect();
        Ok(ts
            .iter()
            .enumerate()
            .map(|(i, &cur)| (cur, ts.get(i + 1).copied().unwrap_or(0)))
            .collect())
    }
}

/// `x_t = sqrt(ab_t) x0 + sqrt(1 - ab_t) eps`.
pub fn forward_noise(x0: &[f64], t: usize, eps: &[f64], schedule: &NoiseSchedule) -> Result<Vec<f64>> {
    if t < 1 || t > schedule.steps() {
        return Err(Error::Parameter(format!("timestep {t} outside [1, {}]", schedule.steps())));
    }
    if x0.len() != eps.len() {
        return Err(Error::Shape(format!("x0 has {} values, noise {}", x0.len(), eps.len())));
    }
    let ab = schedule.alpha_bar(t);
    let (a, b) = (ab.sqrt(), (1.0 - ab).sqrt());
    Ok(x0.iter().zip(eps).map(|(&x, &e)| a * x + b * e).collect())
}

/// One deterministic DDIM update from `t` to `t_prev`:
/// `sqrt(ab_prev) (x_t - sqrt(1 - ab_t) eps) / sqrt(ab_t) + sqrt(1 - ab_prev) eps`.
pub fn ddim_step(x_t: &[f64], t: usize, t_prev: usize, eps_pred: &[f64], schedule: &NoiseSchedule) -> Vec<f64> {
    debug_assert!(t_prev < t);
    ddim_update(x_t, schedule.alpha_bar(t), schedule.alpha_bar(t_prev), eps_pred)
}

/// The same update written directly in terms of the two `alpha_bar` values.
///
/// Expanded as `r x + (sqrt(1 - ab_prev) - r sqrt(1 - ab_t)) eps` with
/// `r = sqrt(ab_prev / ab_t)`, so equal values give exactly `x`.
pub fn ddim_update(x_t: &[f64], ab_t: f64, ab_prev: f64, eps_pred: &[f64]) -> Vec<f64> {
    let (st, nt) = (ab_t.sqrt(), (1.0 - ab_t).sqrt());
    let (sp, np) = (ab_prev.sqrt(), (1.0 - ab_prev).sqrt());
    let r = sp / st;
    let c = np - r * nt;
    x_t.iter().zip(eps_pred).map(|(&x, &e)| r * x + c * e).collect()
}

/// Sinusoidal embedding of a diffusion timestep: `dim / 2` sines followed by
/// the matching cosines over geometric frequencies.
pub fn timestep_embedding(t: usize, dim: usize) -> Vec<f64> {
    let half = dim / 2;
    let mut out = vec![0.0; dim];
    for k in 0..half {
        let freq = (-(10_000f64.ln()) * k as f64 / half as f64).exp();
        let arg = t as f64 * freq;
        out[k] = arg.sin();
        out[half + k] = arg.cos();
    }
    out
}
