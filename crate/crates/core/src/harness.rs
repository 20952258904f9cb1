//! Seeded Monte-Carlo experiments: configuration, per-episode runs against
//! `OPT_FD`, summaries and `runs.csv` persistence.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::adversaries::{
    make_adaptive_price, make_impossibility, make_oscillating_stationary, make_stochastic,
    AdaptivePriceRule, ImpossibilityParams, OscillatingSpec,
};
use crate::benchmark::opt_fd;
use crate::env::seed::{split, tags};
use crate::env::{measure_stationarity, read_trace_csv, worst_case_variation, EnvironmentTrace, ProblemDims, Realization};
use crate::error::{BwkError, Result};
use crate::lagrange::{run_algorithm1, FeedbackMode, LagrangeConfig};
use crate::restart::{choose_t_res_scaled, run_algorithm2, RestartConfig};

/// Raw `key = value` entries, in key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    /// Parses one `key = value` per line; `#` starts a comment, blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(BwkError::config(format!("line {}: expected `key = value`, got `{line}`", n + 1)));
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(BwkError::config(format!("line {}: empty key", n + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(BwkError::config(format!("line {}: duplicate key `{key}`", n + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn required(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| BwkError::config(format!("missing required key `{key}`")))
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|_| BwkError::config(format!("key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    fn parsed_required<T: FromStr>(&self, key: &str) -> Result<T> {
        self.required(key)?;
        Ok(self.parsed(key)?.expect("presence checked"))
    }

    fn vector(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|v| parse_vector(key, v)).transpose()
    }

    fn matrix(&self, key: &str) -> Result<Option<Vec<Vec<f64>>>> {
        self.get(key)
            .map(|v| v.split(';').map(|row| parse_vector(key, row)).collect())
            .transpose()
    }
}

fn parse_vector(key: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| BwkError::config(format!("key `{key}`: cannot parse `{}` as a number", s.trim())))
        })
        .collect()
}

/// Which algorithm an experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Algorithm1,
    Algorithm2,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Algorithm1 => "algorithm1",
            Algorithm::Algorithm2 => "algorithm2",
        }
    }
}

impl FromStr for Algorithm {
    type Err = BwkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "algorithm1" | "alg1" | "1" => Ok(Algorithm::Algorithm1),
            "algorithm2" | "alg2" | "2" => Ok(Algorithm::Algorithm2),
            other => Err(BwkError::config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// Batch length policy of the restarting algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TResPolicy {
    /// Tuned from the variation budget: `scale * (rho T / E)^{2/3}`.
    Auto { scale: f64 },
    Fixed(usize),
}

/// Trace generator and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvSpec {
    Stochastic {
        rewards: Vec<f64>,
        consumptions: Vec<Vec<f64>>,
    },
    Oscillating {
        sigma_r: f64,
        sigma_c: f64,
        peak_rewards: Vec<f64>,
        peak_consumptions: Vec<Vec<f64>>,
        period: usize,
    },
    AdaptivePrice {
        rewards: Vec<f64>,
        base_prices: Vec<Vec<f64>>,
        responsiveness: f64,
        floor_ratio: f64,
        window: usize,
    },
    Impossibility {
        sigma_r: f64,
        sigma_c: f64,
        epsilon: f64,
        /// Defaults to the final (stationary) outcome.
        outcome: Option<usize>,
    },
    TraceFile {
        path: PathBuf,
        sigma_r: f64,
        sigma_c: f64,
    },
}

impl EnvSpec {
    pub fn name(&self) -> &'static str {
        match self {
            EnvSpec::Stochastic { .. } => "stochastic",
            EnvSpec::Oscillating { .. } => "oscillating",
            EnvSpec::AdaptivePrice { .. } => "adaptive_price",
            EnvSpec::Impossibility { .. } => "impossibility",
            EnvSpec::TraceFile { .. } => "trace",
        }
    }

    /// `(sigma_r, sigma_c)` the generator promises.
    pub fn declared(&self) -> (f64, f64) {
        match self {
            EnvSpec::Stochastic { .. } => (1.0, 1.0),
            EnvSpec::Oscillating { sigma_r, sigma_c, .. } => (*sigma_r, *sigma_c),
            EnvSpec::AdaptivePrice { floor_ratio, .. } => (1.0, *floor_ratio),
            EnvSpec::Impossibility { sigma_r, sigma_c, .. } => (*sigma_r, *sigma_c),
            EnvSpec::TraceFile { sigma_r, sigma_c, .. } => (*sigma_r, *sigma_c),
        }
    }

    fn is_stochastic(&self) -> bool {
        matches!(self, EnvSpec::Stochastic { .. })
    }
}

/// Seeds of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedPlan {
    /// `count` seeds derived from `master` by splitting.
    Derived { master: u64, count: usize },
    Explicit(Vec<u64>),
}

impl SeedPlan {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedPlan::Derived { master, count } => {
                (0..*count).map(|i| split(*master, tags::EPISODE, i as u64)).collect()
            }
            SeedPlan::Explicit(list) => list.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    pub algorithm: Algorithm,
    pub horizon: Option<usize>,
    /// Per-round budget; `budget` takes precedence when both are absent from the file.
    pub rho: Option<f64>,
    pub budget: Option<f64>,
    pub delta: f64,
    pub feedback: FeedbackMode,
    pub realization: Realization,
    pub seeds: SeedPlan,
    pub t_res: TResPolicy,
    /// Variation budget override for the auto batch length.
    pub variation: Option<f64>,
    pub out: Option<PathBuf>,
}

const COMMON_KEYS: &[&str] = &[
    "env", "algorithm", "T", "rho", "budget", "delta", "feedback", "realization", "seeds",
    "master_seed", "seed_list", "t_res", "t_res_scale", "variation", "out",
];

fn env_keys(env: &str) -> Result<&'static [&'static str]> {
    Ok(match env {
        "stochastic" => &["rewards", "consumptions"],
        "oscillating" => &["sigma_r", "sigma_c", "rewards", "consumptions", "period"],
        "adaptive_price" => &["rewards", "consumptions", "responsiveness", "floor_ratio", "window"],
        "impossibility" => &["sigma_r", "sigma_c", "epsilon", "outcome"],
        "trace" => &["trace", "sigma_r", "sigma_c"],
        other => return Err(BwkError::config(format!("unknown generator `{other}`"))),
    })
}

impl ExperimentConfig {
    pub fn from_map(map: &ConfigMap) -> Result<Self> {
        let env_name = map.required("env")?.to_ascii_lowercase();
        let specific = env_keys(&env_name)?;
        if let Some(bad) = map.keys().find(|k| !COMMON_KEYS.contains(k) && !specific.contains(k)) {
            return Err(BwkError::config(format!("key `{bad}` is not valid for generator `{env_name}`")));
        }
        let matrix = |key: &str| -> Result<Vec<Vec<f64>>> {
            map.matrix(key)?
                .ok_or_else(|| BwkError::config(format!("missing required key `{key}`")))
        };
        let vector = |key: &str| -> Result<Vec<f64>> {
            map.vector(key)?
                .ok_or_else(|| BwkError::config(format!("missing required key `{key}`")))
        };
        let env = match env_name.as_str() {
            "stochastic" => EnvSpec::Stochastic {
                rewards: vector("rewards")?,
                consumptions: matrix("consumptions")?,
            },
            "oscillating" => EnvSpec::Oscillating {
                sigma_r: map.parsed_required("sigma_r")?,
                sigma_c: map.parsed_required("sigma_c")?,
                peak_rewards: vector("rewards")?,
                peak_consumptions: matrix("consumptions")?,
                period: map.parsed_required("period")?,
            },
            "adaptive_price" => EnvSpec::AdaptivePrice {
                rewards: vector("rewards")?,
                base_prices: matrix("consumptions")?,
                responsiveness: map.parsed_required("responsiveness")?,
                floor_ratio: map.parsed_required("floor_ratio")?,
                window: map.parsed("window")?.unwrap_or(50),
            },
            "impossibility" => EnvSpec::Impossibility {
                sigma_r: map.parsed_required("sigma_r")?,
                sigma_c: map.parsed_required("sigma_c")?,
                epsilon: map.parsed("epsilon")?.unwrap_or(0.1),
                outcome: map.parsed("outcome")?,
            },
            _ => EnvSpec::TraceFile {
                path: PathBuf::from(map.required("trace")?),
                sigma_r: map.parsed("sigma_r")?.unwrap_or(0.0),
                sigma_c: map.parsed("sigma_c")?.unwrap_or(0.0),
            },
        };
        let seeds = match (map.get("seed_list"), map.get("seeds")) {
            (Some(_), Some(_)) => return Err(BwkError::config("give either `seeds` or `seed_list`, not both")),
            (Some(list), None) => SeedPlan::Explicit(
                list.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<u64>()
                            .map_err(|_| BwkError::config(format!("key `seed_list`: cannot parse `{}`", s.trim())))
                    })
                    .collect::<Result<_>>()?,
            ),
            _ => SeedPlan::Derived {
                master: map.parsed("master_seed")?.unwrap_or(0),
                count: map.parsed("seeds")?.unwrap_or(1),
            },
        };
        let t_res = match map.get("t_res") {
            None | Some("auto") => TResPolicy::Auto {
                scale: map.parsed("t_res_scale")?.unwrap_or(1.0),
            },
            Some(_) => TResPolicy::Fixed(map.parsed_required("t_res")?),
        };
        let cfg = Self {
            env,
            algorithm: map.parsed("algorithm")?.unwrap_or(Algorithm::Algorithm1),
            horizon: map.parsed("T")?,
            rho: map.parsed("rho")?,
            budget: map.parsed("budget")?,
            delta: map.parsed("delta")?.unwrap_or(0.05),
            feedback: map.parsed("feedback")?.unwrap_or_default(),
            realization: map.parsed("realization")?.unwrap_or_default(),
            seeds,
            t_res,
            variation: map.parsed("variation")?,
            out: map.get("out").map(PathBuf::from),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.seeds().is_empty() {
            return Err(BwkError::config("the seed list is empty"));
        }
        if self.rho.is_some() && self.budget.is_some() {
            return Err(BwkError::config("give either `rho` or `budget`, not both"));
        }
        if !matches!(self.env, EnvSpec::TraceFile { .. }) && self.horizon.is_none() {
            return Err(BwkError::config("missing required key `T`"));
        }
        if matches!(self.env, EnvSpec::Impossibility { .. }) && self.rho.is_none() {
            return Err(BwkError::config("the impossibility generator needs `rho`"));
        }
        if self.rho.is_none() && self.budget.is_none() {
            return Err(BwkError::config("missing `rho` or `budget`"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(BwkError::config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if let TResPolicy::Auto { scale } = self.t_res {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(BwkError::config("t_res_scale must be positive"));
            }
        }
        Ok(())
    }

    /// Builds the episode template. Adaptive traces come back unmaterialized.
    pub fn build_trace(&self) -> Result<EnvironmentTrace> {
        let budget_for = |horizon: usize| -> f64 {
            match (self.budget, self.rho) {
                (Some(b), _) => b,
                (None, Some(rho)) => rho * horizon as f64,
                (None, None) => 0.0,
            }
        };
        let trace = match &self.env {
            EnvSpec::Stochastic { rewards, consumptions } => {
                let t = self.horizon.unwrap_or(0);
                make_stochastic(rewards, consumptions, t, budget_for(t), self.realization)?
            }
            EnvSpec::Oscillating {
                sigma_r,
                sigma_c,
                peak_rewards,
                peak_consumptions,
                period,
            } => {
                let t = self.horizon.unwrap_or(0);
                let spec = OscillatingSpec {
                    sigma_r: *sigma_r,
                    sigma_c: *sigma_c,
                    peak_rewards: peak_rewards.clone(),
                    peak_consumptions: peak_consumptions.clone(),
                    period: *period,
                    horizon: t,
                    budget: budget_for(t),
                };
                make_oscillating_stationary(&spec, self.realization)?
            }
            EnvSpec::AdaptivePrice {
                rewards,
                base_prices,
                responsiveness,
                floor_ratio,
                window,
            } => {
                let t = self.horizon.unwrap_or(0);
                let rule = AdaptivePriceRule::new(
                    rewards.clone(),
                    base_prices.clone(),
                    *responsiveness,
                    *floor_ratio,
                    *window,
                )?;
                make_adaptive_price(rule, t, budget_for(t), self.realization)?
            }
            EnvSpec::Impossibility {
                sigma_r,
                sigma_c,
                epsilon,
                outcome,
            } => {
                let t = self.horizon.unwrap_or(0);
                let params = ImpossibilityParams::new(self.rho.unwrap_or(0.0), *sigma_r, *sigma_c, *epsilon, t)?;
                let q = outcome.unwrap_or(params.outcomes());
                make_impossibility(&params, q, self.realization)?
            }
            EnvSpec::TraceFile { path, .. } => {
                let file = File::open(path).map_err(|e| {
                    BwkError::config(format!("cannot open trace `{}`: {e}", path.display()))
                })?;
                let trace = read_trace_csv(BufReader::new(file), 0.0, self.realization)?;
                let t = trace.dims().horizon;
                if let Some(want) = self.horizon {
                    if want != t {
                        return Err(BwkError::config(format!("T = {want} but the trace has {t} rounds")));
                    }
                }
                trace.with_budget(budget_for(t))?
            }
        };
        Ok(trace)
    }
}

impl FromStr for ExperimentConfig {
    type Err = BwkError;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_map(&ConfigMap::parse(s)?)
    }
}

/// One episode's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run_id: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub horizon: usize,
    pub actions: usize,
    pub resources: usize,
    pub rho: f64,
    pub sigma_r_declared: f64,
    pub sigma_c_declared: f64,
    pub sigma_r_measured: f64,
    pub sigma_c_measured: f64,
    pub stopping_round: usize,
    pub reward: f64,
    pub opt_fd: f64,
    pub ratio: f64,
    /// Worst-case consumption variation of the materialized trace.
    pub variation: f64,
    pub t_res: usize,
    pub budget: f64,
    pub max_consumption: f64,
    /// Measured stationarity is at least the declared one.
    pub stationarity_ok: bool,
    /// Ratio within realization noise (`1 + 3/sqrt(T)`) on stochastic envs; always true otherwise.
    pub ratio_ok: bool,
}

impl RunRecord {
    pub fn within_budget(&self) -> bool {
        self.max_consumption <= self.budget
    }
}

fn batch_len_for(cfg: &ExperimentConfig, template: &EnvironmentTrace) -> Result<usize> {
    let dims = template.dims();
    match cfg.t_res {
        TResPolicy::Fixed(n) => Ok(n),
        TResPolicy::Auto { scale } => {
            let variation = match cfg.variation {
                Some(e) => e,
                None if template.is_adaptive() => {
                    return Err(BwkError::config(
                        "automatic t_res on an adaptive generator needs an explicit `variation`",
                    ))
                }
                None => worst_case_variation(template),
            };
            Ok(choose_t_res_scaled(dims.rho(), dims.horizon, variation, scale))
        }
    }
}

/// Runs one episode per seed, in parallel, returning records in seed order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let template = cfg.build_trace()?;
    let dims: ProblemDims = *template.dims();
    let base = LagrangeConfig::new(dims, cfg.delta)?.with_feedback(cfg.feedback);
    let restart = match cfg.algorithm {
        Algorithm::Algorithm1 => None,
        Algorithm::Algorithm2 => Some(RestartConfig::new(base.clone(), batch_len_for(cfg, &template)?)?),
    };
    let (decl_r, decl_c) = cfg.env.declared();
    let seeds = cfg.seeds.seeds();
    let stochastic = cfg.env.is_stochastic();
    seeds
        .par_iter()
        .enumerate()
        .map(|(run_id, &seed)| {
            let mut trace = template.clone();
            let (result, t_res) = match &restart {
                None => (run_algorithm1(&mut trace, &base, None, seed)?, dims.horizon),
                Some(rc) => (run_algorithm2(&mut trace, rc, seed)?, rc.batch_len),
            };
            let opt = opt_fd(&trace, dims.budget)?.value;
            let measured = measure_stationarity(&trace);
            let ratio = if opt > 0.0 { result.total_reward / opt } else { 0.0 };
            let noise = 1.0 + 3.0 / (dims.horizon.max(1) as f64).sqrt();
            Ok(RunRecord {
                run_id,
                seed,
                algorithm: cfg.algorithm,
                horizon: dims.horizon,
                actions: dims.actions,
                resources: dims.resources,
                rho: dims.rho(),
                sigma_r_declared: decl_r,
                sigma_c_declared: decl_c,
                sigma_r_measured: measured.sigma_r,
                sigma_c_measured: measured.sigma_c,
                stopping_round: result.stopping_round,
                reward: result.total_reward,
                opt_fd: opt,
                ratio,
                variation: worst_case_variation(&trace),
                t_res,
                budget: result.budget,
                max_consumption: result.max_consumption(),
                stationarity_ok: measured.sigma_r >= decl_r - 1e-9 && measured.sigma_c >= decl_c - 1e-9,
                ratio_ok: !stochastic || ratio <= noise,
            })
        })
        .collect()
}

pub const RUNS_HEADER: [&str; 17] = [
    "run_id", "seed", "algo", "T", "K", "d", "rho", "sigma_r_decl", "sigma_c_decl", "sigma_r_meas",
    "sigma_c_meas", "T_A", "REW", "OPT_FD", "ratio", "E", "T_res",
];

pub fn write_runs_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUNS_HEADER)?;
    for r in records {
        w.write_record([
            r.run_id.to_string(),
            r.seed.to_string(),
            r.algorithm.name().to_string(),
            r.horizon.to_string(),
            r.actions.to_string(),
            r.resources.to_string(),
            r.rho.to_string(),
            r.sigma_r_declared.to_string(),
            r.sigma_c_declared.to_string(),
            r.sigma_r_measured.to_string(),
            r.sigma_c_measured.to_string(),
            r.stopping_round.to_string(),
            r.reward.to_string(),
            r.opt_fd.to_string(),
            r.ratio.to_string(),
            r.variation.to_string(),
            r.t_res.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Distribution of competitive ratios over a set of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (0 for a single run).
    pub stdev: f64,
    pub min: f64,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
    pub max: f64,
    pub threshold: f64,
    /// Fraction of runs whose ratio is at least `threshold`.
    pub fraction_meeting: f64,
}

/// Nearest-rank quantile of an ascending slice: the `ceil(q n)`-th smallest value.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = (q * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

pub fn summarize(records: &[RunRecord], threshold: f64) -> Result<Summary> {
    if records.is_empty() {
        return Err(BwkError::validation("cannot summarize an empty set of runs"));
    }
    let n = records.len();
    let mut ratios: Vec<f64> = records.iter().map(|r| r.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let mean = ratios.iter().sum::<f64>() / n as f64;
    let stdev = if n > 1 {
        (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(Summary {
        count: n,
        mean,
        stdev,
        min: ratios[0],
        q05: nearest_rank(&ratios, 0.05),
        median: nearest_rank(&ratios, 0.5),
        q95: nearest_rank(&ratios, 0.95),
        max: ratios[n - 1],
        threshold,
        fraction_meeting: ratios.iter().filter(|r| **r >= threshold).count() as f64 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const STOCHASTIC: &str = "
        # small stochastic experiment
        env = stochastic
        algorithm = algorithm1
        T = 2000
        rho = 0.25
        rewards = 0, 0.8, 0.5
        consumptions = 0, 0.6, 0.2
        seeds = 3
        master_seed = 7
    ";

    #[test]
    fn parses_flat_config() {
        let cfg: ExperimentConfig = STOCHASTIC.parse().unwrap();
        assert_eq!(cfg.horizon, Some(2000));
        assert_eq!(cfg.algorithm, Algorithm::Algorithm1);
        assert_eq!(cfg.delta, 0.05);
        assert_eq!(cfg.seeds.seeds().len(), 3);
        match &cfg.env {
            EnvSpec::Stochastic { rewards, consumptions } => {
                assert_eq!(rewards, &vec![0.0, 0.8, 0.5]);
                assert_eq!(consumptions, &vec![vec![0.0, 0.6, 0.2]]);
            }
            other => panic!("unexpected env {other:?}"),
        }
    }

    #[test]
    fn config_errors() {
        assert!(ConfigMap::parse("a = 1\na = 2").is_err());
        assert!(ConfigMap::parse("no equals sign").is_err());
        let bad_gen = STOCHASTIC.replace("env = stochastic", "env = martian");
        assert!(bad_gen.parse::<ExperimentConfig>().is_err());
        let stray = format!("{STOCHASTIC}\nperiod = 10");
        let err = stray.parse::<ExperimentConfig>().unwrap_err();
        assert!(err.is_user_error());
        let empty = STOCHASTIC.replace("seeds = 3", "seeds = 0");
        assert!(empty.parse::<ExperimentConfig>().is_err());
        let both = format!("{STOCHASTIC}\nbudget = 10");
        assert!(both.parse::<ExperimentConfig>().is_err());
    }

    #[test]
    fn derived_seeds_are_split_not_sequential() {
        let plan = SeedPlan::Derived { master: 7, count: 3 };
        let s = plan.seeds();
        assert_eq!(s[1], split(7, tags::EPISODE, 1));
        assert!(s.windows(2).all(|w| w[1] != w[0] + 1));
    }

    #[test]
    fn zero_budget_gives_zero_ratio() {
        let cfg: ExperimentConfig = STOCHASTIC
            .replace("rho = 0.25", "budget = 0")
            .replace("seeds = 3", "seeds = 1")
            .parse()
            .unwrap();
        let recs = run_experiment(&cfg).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].reward, 0.0);
        assert_eq!(recs[0].ratio, 0.0);
        assert_eq!(recs[0].stopping_round, 0);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let cfg: ExperimentConfig = STOCHASTIC.parse().unwrap();
        let render = |recs: &[RunRecord]| {
            let mut buf = Vec::new();
            write_runs_csv(recs, &mut buf).unwrap();
            buf
        };
        let a = render(&run_experiment(&cfg).unwrap());
        let b = render(&run_experiment(&cfg).unwrap());
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with(&RUNS_HEADER.join(",")));
        assert_eq!(text.lines().count(), 4);
    }

    fn record(ratio: f64) -> RunRecord {
        RunRecord {
            run_id: 0,
            seed: 0,
            algorithm: Algorithm::Algorithm1,
            horizon: 1,
            actions: 2,
            resources: 1,
            rho: 0.5,
            sigma_r_declared: 1.0,
            sigma_c_declared: 1.0,
            sigma_r_measured: 1.0,
            sigma_c_measured: 1.0,
            stopping_round: 0,
            reward: 0.0,
            opt_fd: 1.0,
            ratio,
            variation: 0.0,
            t_res: 1,
            budget: 0.5,
            max_consumption: 0.0,
            stationarity_ok: true,
            ratio_ok: true,
        }
    }

    #[test]
    fn summary_examples() {
        assert!(summarize(&[], 0.5).is_err());
        let one = summarize(&[record(0.7)], 0.5).unwrap();
        assert_eq!((one.mean, one.stdev, one.median), (0.7, 0.0, 0.7));
        let four: Vec<_> = [0.2, 0.4, 0.6, 0.8].into_iter().map(record).collect();
        let s = summarize(&four, 0.45).unwrap();
        assert!((s.mean - 0.5).abs() < 1e-15);
        assert_eq!(s.median, 0.4);
        assert_eq!(s.q95, 0.8);
        assert_eq!(s.q05, 0.2);
        assert_eq!(s.fraction_meeting, 0.5);
    }

    #[test]
    fn nearest_rank_rule() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 0.0), 1.0);
        assert_eq!(nearest_rank(&v, 0.3), 3.0);
        assert_eq!(nearest_rank(&v, 0.31), 4.0);
        assert_eq!(nearest_rank(&v, 1.0), 10.0);
    }
}
