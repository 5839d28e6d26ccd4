//! Canned experiment suites: build one dataset per arm and seed, train a
//! policy on it, evaluate it on the grid and aggregate across seeds.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eval_checkpoint, write_report, EvalReport, GridSpec};
use crate::datagen::{build_dataset, DatasetSpec, GenContext, Paradigm, Sampling};
use crate::error::{Error, Result};
use crate::motion::AugmentationSchedule;
use crate::policy::{train_kind, PolicyKind, TrainConfig};
use crate::rng::derive_seed;
use crate::world::RandomizationLevel;

/// Largest relative spread of dataset sizes among arms sharing a budget.
pub const BUDGET_PARITY: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Experiment {
    Sparse9,
    Dense,
    Circle,
    Ladder,
    DimAblation,
    VmaxSweep,
    ParadigmTriple,
    /// MOVE at budget B against static at 2B.
    Efficiency,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Sparse9,
        Experiment::Dense,
        Experiment::Circle,
        Experiment::Ladder,
        Experiment::DimAblation,
        Experiment::VmaxSweep,
        Experiment::ParadigmTriple,
        Experiment::Efficiency,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Sparse9 => "sparse9",
            Experiment::Dense => "dense",
            Experiment::Circle => "circle",
            Experiment::Ladder => "ladder",
            Experiment::DimAblation => "dims",
            Experiment::VmaxSweep => "vmax",
            Experiment::ParadigmTriple => "triple",
            Experiment::Efficiency => "efficiency",
        }
    }

    /// Arms at nominal `budget` with `base` as the generation context.
    pub fn arms(self, budget: u64, base: &GenContext) -> Vec<ArmSpec> {
        let l1 = RandomizationLevel::ObjectOnly;
        let arm = |name: &str, paradigm, sampling, level| ArmSpec {
            name: name.to_string(),
            paradigm,
            sampling,
            level,
            budget,
            schedule: None,
            ctx: *base,
        };
        use Paradigm::*;
        use Sampling::*;
        match self {
            Experiment::Sparse9 => vec![arm("static", Static, Sparse9, l1), arm("move", Move, Sparse9, l1)],
            Experiment::Dense => vec![arm("static", Static, DenseUniform, l1), arm("move", Move, DenseUniform, l1)],
            Experiment::Circle => vec![arm("static", Static, Circle, l1), arm("move", Move, Circle, l1)],
            Experiment::Ladder => RandomizationLevel::ALL
                .iter()
                .map(|&l| arm(&format!("static-l{}", l as u8), Static, DenseUniform, l))
                .collect(),
            Experiment::DimAblation => ["Vm", "+Vo", "+Vc", "+w"]
                .iter()
                .enumerate()
                .map(|(i, n)| ArmSpec {
                    schedule: Some(AugmentationSchedule::cumulative(i + 1)),
                    ..arm(n, Move, DenseUniform, RandomizationLevel::ObjectTargetCamera)
                })
                .collect(),
            Experiment::VmaxSweep => [0.5, 1.0, 2.0, 4.0]
                .iter()
                .map(|&f| {
                    let mut a = arm(&format!("vmax-x{f}"), Move, DenseUniform, l1);
                    a.ctx.params.v_max *= f;
                    a
                })
                .collect(),
            Experiment::ParadigmTriple => vec![
                arm("static", Static, DenseUniform, l1),
                arm("adc", Adc, DenseUniform, l1),
                arm("move", Move, DenseUniform, l1),
            ],
            Experiment::Efficiency => vec![
                ArmSpec {
                    budget: 2 * budget,
                    ..arm("static-2B", Static, DenseUniform, l1)
                },
                arm("move-B", Move, DenseUniform, l1),
            ],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown experiment '{s}' (expected sparse9, dense, circle, ladder, dims, vmax, triple or efficiency)"
                ))
            })
    }
}

/// One arm of a comparison. The seed is supplied per run.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSpec {
    pub name: String,
    pub paradigm: Paradigm,
    pub sampling: Sampling,
    /// Randomization level for both generation and evaluation.
    pub level: RandomizationLevel,
    pub budget: u64,
    pub schedule: Option<AugmentationSchedule>,
    pub ctx: GenContext,
}

impl ArmSpec {
    pub fn dataset_spec(&self, seed: u64) -> DatasetSpec {
        DatasetSpec {
            schedule: self.schedule,
            ..DatasetSpec::new(self.paradigm, self.sampling, self.level, self.budget, seed)
        }
    }
}

/// Settings shared by every arm of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonConfig {
    pub ctx: GenContext,
    pub policy: PolicyKind,
    /// `seed` is replaced by each run's seed.
    pub train: TrainConfig,
    pub grid_resolution: usize,
    pub episodes_per_cell: usize,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig {
            ctx: GenContext::default(),
            policy: PolicyKind::Diffusion,
            train: TrainConfig::default(),
            grid_resolution: 13,
            episodes_per_cell: 3,
        }
    }
}

/// Outcome of one (arm, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmRun {
    pub seed: u64,
    pub success_rate: f64,
    pub normalized_score: f64,
    /// Success over cells within the circle radius of the workspace centre.
    pub inside: Option<f64>,
    pub outside: Option<f64>,
    pub total_timesteps: u64,
    pub trajectories: usize,
    pub error: Option<String>,
    #[serde(skip)]
    pub report: Option<EvalReport>,
}

impl ArmRun {
    fn failed(seed: u64, e: &Error) -> Self {
        ArmRun {
            seed,
            success_rate: f64::NAN,
            normalized_score: f64::NAN,
            inside: None,
            outside: None,
            total_timesteps: 0,
            trajectories: 0,
            error: Some(e.to_string()),
            report: None,
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Stat { mean, std: var.sqrt() })
    }
}

impl fmt::Display for Stat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.3} ± {:.3}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub name: String,
    pub paradigm: Paradigm,
    pub sampling: Sampling,
    pub level: RandomizationLevel,
    pub budget: u64,
    pub v_max: f64,
    pub runs: Vec<ArmRun>,
    /// Any run failed; statistics cover the remaining runs.
    pub failed: bool,
    pub success: Option<Stat>,
    pub score: Option<Stat>,
    pub inside: Option<Stat>,
    pub outside: Option<Stat>,
}

impl ArmSummary {
    fn new(spec: &ArmSpec, runs: Vec<ArmRun>) -> Self {
        let ok: Vec<&ArmRun> = runs.iter().filter(|r| r.ok()).collect();
        let stat = |f: &dyn Fn(&ArmRun) -> Option<f64>| {
            let v: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
            Stat::of(&v)
        };
        ArmSummary {
            name: spec.name.clone(),
            paradigm: spec.paradigm,
            sampling: spec.sampling,
            level: spec.level,
            budget: spec.budget,
            v_max: spec.ctx.params.v_max,
            failed: ok.len() < runs.len(),
            success: stat(&|r| Some(r.success_rate)),
            score: stat(&|r| Some(r.normalized_score)),
            inside: stat(&|r| r.inside),
            outside: stat(&|r| r.outside),
            runs,
        }
    }

    /// Mean aggregate success, if any run completed.
    pub fn mean(&self) -> Option<f64> {
        self.success.map(|s| s.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub experiment: Experiment,
    pub budget: u64,
    pub seeds: Vec<u64>,
    pub policy: PolicyKind,
    pub train_steps: usize,
    pub grid_resolution: usize,
    pub episodes_per_cell: usize,
    pub arms: Vec<ArmSummary>,
}

impl ComparisonReport {
    pub fn arm(&self, name: &str) -> Option<&ArmSummary> {
        self.arms.iter().find(|a| a.name == name)
    }

    /// Human-readable table, one line per arm.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{} (budget {}, seeds {:?}, {} policy)\n",
            self.experiment,
            self.budget,
            self.seeds,
            self.policy.name()
        );
        for a in &self.arms {
            let show = |x: Option<Stat>| x.map_or("n/a".to_string(), |v| v.to_string());
            s += &format!("  {:<10} success {}  score {}", a.name, show(a.success), show(a.score));
            if a.inside.is_some() {
                s += &format!("  in {}  out {}", show(a.inside), show(a.outside));
            }
            if a.failed {
                s += "  [FAILED]";
            }
            s.push('\n');
        }
        s
    }
}

type CacheKey = String;

/// Runs comparisons, memoizing (arm, seed) runs so that suites sharing an
/// arm train it once.
#[derive(Debug, Default)]
pub struct Runner {
    pub cfg: ComparisonConfig,
    cache: Mutex<HashMap<CacheKey, ArmRun>>,
}

impl Runner {
    pub fn new(cfg: ComparisonConfig) -> Self {
        Runner {
            cfg,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn key(&self, arm: &ArmSpec, seed: u64) -> CacheKey {
        format!(
            "{:?}|{:?}|{:?}|{:?}|{}|{}|{seed}",
            arm.dataset_spec(seed),
            arm.ctx,
            self.cfg.policy,
            self.cfg.train,
            self.cfg.grid_resolution,
            self.cfg.episodes_per_cell
        )
    }

    /// Builds, trains and evaluates a single arm for one seed.
    pub fn run_arm(&self, arm: &ArmSpec, seed: u64) -> ArmRun {
        let key = self.key(arm, seed);
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return hit.clone();
        }
        let run = self.execute(arm, seed).unwrap_or_else(|e| ArmRun::failed(seed, &e));
        self.cache.lock().expect("cache lock").insert(key, run.clone());
        run
    }

    fn execute(&self, arm: &ArmSpec, seed: u64) -> Result<ArmRun> {
        let dataset = build_dataset(&arm.dataset_spec(seed), &arm.ctx)?;
        let train = TrainConfig {
            seed,
            ..self.cfg.train.clone()
        };
        let (ckpt, _) = train_kind(self.cfg.policy, &dataset, &train)?;
        let grid = GridSpec::new(
            self.cfg.grid_resolution,
            self.cfg.episodes_per_cell,
            arm.level,
            derive_seed(seed, &[0x6576_616c]),
        );
        let report = eval_checkpoint(&ckpt, &arm.ctx.world, &grid)?;
        let r = arm.ctx.datagen.circle_radius;
        let inside = |c: &super::CellResult| (c.x * c.x + c.y * c.y).sqrt() <= r;
        Ok(ArmRun {
            seed,
            success_rate: report.success_rate,
            normalized_score: report.normalized_score,
            inside: report.success_where(inside),
            outside: report.success_where(|c| !inside(c)),
            total_timesteps: dataset.total_timesteps(),
            trajectories: dataset.trajectories.len(),
            error: None,
            report: Some(report),
        })
    }

    /// Runs every arm of `experiment` for every seed.
    pub fn run(&self, experiment: Experiment, budget: u64, seeds: &[u64]) -> Result<ComparisonReport> {
        if seeds.is_empty() {
            return Err(Error::Parameter("a comparison needs at least one seed".into()));
        }
        let arms = experiment.arms(budget, &self.cfg.ctx);
        let jobs: Vec<(usize, u64)> = (0..arms.len())
            .flat_map(|a| seeds.iter().map(move |&s| (a, s)))
            .collect();
        let runs: Vec<ArmRun> = jobs.par_iter().map(|&(a, s)| self.run_arm(&arms[a], s)).collect();
        let mut per_arm: Vec<Vec<ArmRun>> = vec![Vec::new(); arms.len()];
        for (&(a, _), run) in jobs.iter().zip(runs) {
            per_arm[a].push(run);
        }
        check_budget_parity(&arms, &per_arm, seeds)?;
        Ok(ComparisonReport {
            experiment,
            budget,
            seeds: seeds.to_vec(),
            policy: self.cfg.policy,
            train_steps: self.cfg.train.steps,
            grid_resolution: self.cfg.grid_resolution,
            episodes_per_cell: self.cfg.episodes_per_cell,
            arms: arms.iter().zip(per_arm).map(|(spec, runs)| ArmSummary::new(spec, runs)).collect(),
        })
    }
}

/// Arms sharing a nominal budget must have consumed sizes within
/// [`BUDGET_PARITY`] of each other for every seed.
fn check_budget_parity(arms: &[ArmSpec], runs: &[Vec<ArmRun>], seeds: &[u64]) -> Result<()> {
    for (si, seed) in seeds.iter().enumerate() {
        let mut by_budget: HashMap<u64, Vec<u64>> = HashMap::new();
        for (arm, r) in arms.iter().zip(runs) {
            if r[si].ok() {
                by_budget.entry(arm.budget).or_default().push(r[si].total_timesteps);
            }
        }
        for (budget, sizes) in by_budget {
            let (lo, hi) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
            if (hi - lo) as f64 > BUDGET_PARITY * lo as f64 {
                return Err(Error::State(format!(
                    "budget parity violated at budget {budget}, seed {seed}: sizes {lo}..{hi}"
                )));
            }
        }
    }
    Ok(())
}

/// Shorthand for a one-off comparison without memoization.
pub fn run_comparison(
    experiment: Experiment,
    budget: u64,
    seeds: &[u64],
    cfg: &ComparisonConfig,
) -> Result<ComparisonReport> {
    Runner::new(cfg.clone()).run(experiment, budget, seeds)
}

/// Writes `comparison.json`, `comparison.csv` and one report directory per
/// completed run (`<arm>/seed-<s>/`).
pub fn write_comparison(report: &ComparisonReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::format("comparison", e.to_string()))?;
    let path = dir.join("comparison.json");
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    let mut csv = String::from("arm,seed,success,score,inside,outside,total_timesteps,trajectories,error\n");
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6}"));
    for a in &report.arms {
        for r in &a.runs {
            csv += &format!(
                "{},{},{:.6},{:.6},{},{},{},{},{}\n",
                a.name,
                r.seed,
                r.success_rate,
                r.normalized_score,
                opt(r.inside),
                opt(r.outside),
                r.total_timesteps,
                r.trajectories,
                r.error.as_deref().unwrap_or("").replace(',', ";")
            );
            if let Some(ev) = &r.report {
                write_report(ev, &dir.join(&a.name).join(format!("seed-{}", r.seed)))?;
            }
        }
    }
    let path = dir.join("comparison.csv");
    fs::write(&path, csv).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("nope".parse::<Experiment>().is_err());
    }

    #[test]
    fn arm_sets() {
        let ctx = GenContext::default();
        let names = |e: Experiment| e.arms(5000, &ctx).into_iter().map(|a| a.name).collect::<Vec<_>>();
        assert_eq!(names(Experiment::ParadigmTriple), ["static", "adc", "move"]);
        assert_eq!(names(Experiment::Ladder).len(), 3);
        let v: Vec<f64> = Experiment::VmaxSweep.arms(5000, &ctx).iter().map(|a| a.ctx.params.v_max).collect();
        let base = ctx.params.v_max;
        assert_eq!(v, vec![0.5 * base, base, 2.0 * base, 4.0 * base]);
        let eff = Experiment::Efficiency.arms(5000, &ctx);
        assert_eq!((eff[0].budget, eff[1].budget), (10_000, 5000));
        let dims = Experiment::DimAblation.arms(5000, &ctx);
        assert!(dims.iter().all(|a| a.paradigm == Paradigm::Move && a.schedule.is_some()));
    }

    #[test]
    fn stat_mean_std() {
        let s = Stat::of(&[1.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.std), (2.0, 1.0));
        assert!(Stat::of(&[]).is_none());
    }

    #[test]
    fn failed_arm_is_marked_and_others_proceed() {
        let mut cfg = ComparisonConfig::default();
        cfg.train.steps = 20;
        cfg.grid_resolution = 2;
        cfg.episodes_per_cell = 1;
        let runner = Runner::new(cfg);
        let ctx = GenContext::default();
        let good = &Experiment::Sparse9.arms(1500, &ctx)[0];
        let bad = ArmSpec {
            budget: 10,
            ..good.clone()
        };
        assert!(runner.run_arm(&bad, 1).error.is_some());
        let ok = runner.run_arm(good, 1);
        assert!(ok.ok(), "{:?}", ok.error);
        let summary = ArmSummary::new(&bad, vec![runner.run_arm(&bad, 1), runner.run_arm(&bad, 2)]);
        assert!(summary.failed && summary.success.is_none());
    }
}
