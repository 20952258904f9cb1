//! Restarting wrapper: fresh Lagrangian players on consecutive batches of
//! `T_res` rounds, each holding a budget of `floor(rho |batch|) - 1`.

use std::io::Write;

use crate::env::seed::{split, tags};
use crate::env::{EnvironmentTrace, History, SeedStream};
use crate::error::{BwkError, Result};
use crate::lagrange::{play_window, BwkRunResult, LagrangeConfig};

/// Per-batch accounting of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    /// 1-based batch index.
    pub batch: usize,
    pub start: usize,
    pub len: usize,
    pub budget: f64,
    pub reward: f64,
    pub consumed_max: f64,
    pub rounds_played: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartConfig {
    pub base: LagrangeConfig,
    /// Batch length `T_res`.
    pub batch_len: usize,
    /// Variation budget the batch length was tuned from, if any.
    pub variation_estimate: Option<f64>,
}

impl RestartConfig {
    pub fn new(base: LagrangeConfig, batch_len: usize) -> Result<Self> {
        if batch_len == 0 || batch_len > base.dims.horizon {
            return Err(BwkError::config(format!(
                "batch length {batch_len} must lie in 1..={}",
                base.dims.horizon
            )));
        }
        Ok(Self {
            base,
            batch_len,
            variation_estimate: None,
        })
    }

    /// Batch length tuned from a variation budget `E`.
    pub fn tuned(base: LagrangeConfig, variation: f64) -> Result<Self> {
        if !(variation.is_finite() && variation >= 0.0) {
            return Err(BwkError::config(format!("variation budget {variation} is invalid")));
        }
        let len = choose_t_res(base.dims.rho(), base.dims.horizon, variation);
        let mut cfg = Self::new(base, len)?;
        cfg.variation_estimate = Some(variation);
        Ok(cfg)
    }

    /// Batches shorter than `1/rho` get a zero budget after the `-1` reserve.
    pub fn is_short_batch(&self) -> bool {
        (self.batch_len as f64) * self.base.dims.rho() < 1.0
    }

    pub fn batch_count(&self) -> usize {
        self.base.dims.horizon.div_ceil(self.batch_len)
    }
}

/// `T_res = clamp(round((rho T / E)^{2/3}), 1, T)`, and `T` when `E = 0`.
pub fn choose_t_res(rho: f64, horizon: usize, variation: f64) -> usize {
    choose_t_res_scaled(rho, horizon, variation, 1.0)
}

/// [`choose_t_res`] with an explicit multiplier on `(rho T / E)^{2/3}`.
pub fn choose_t_res_scaled(rho: f64, horizon: usize, variation: f64, constant: f64) -> usize {
    if variation <= 0.0 {
        return horizon;
    }
    let raw = constant * (rho * horizon as f64 / variation).powf(2.0 / 3.0);
    if !raw.is_finite() {
        return horizon;
    }
    (raw.round() as usize).clamp(1, horizon.max(1))
}

/// Budget of a batch of `len` rounds: `max(floor(rho len) - 1, 0)`.
pub fn batch_budget(rho: f64, len: usize) -> f64 {
    // The small offset keeps products such as 0.1 * 30 from flooring to 2.
    ((rho * len as f64 + 1e-9).floor() - 1.0).max(0.0)
}

/// Runs the restarting player with per-batch learner seeds derived from `seed`.
pub fn run_algorithm2(
    trace: &mut EnvironmentTrace,
    config: &RestartConfig,
    seed: u64,
) -> Result<BwkRunResult> {
    let seeds: Vec<u64> = (0..config.batch_count())
        .map(|j| split(seed, tags::LEARNERS, j as u64))
        .collect();
    run_algorithm2_with_batch_seeds(trace, config, seed, &seeds)
}

/// Runs the restarting player with explicit learner seeds, one per batch.
///
/// Realizations are drawn from `seed` exactly as in
/// [`crate::lagrange::run_algorithm1`], so the two can be compared on paired seeds.
pub fn run_algorithm2_with_batch_seeds(
    trace: &mut EnvironmentTrace,
    config: &RestartConfig,
    seed: u64,
    batch_seeds: &[u64],
) -> Result<BwkRunResult> {
    let dims = *trace.dims();
    let base = &config.base;
    if dims.horizon != base.dims.horizon
        || dims.actions != base.dims.actions
        || dims.resources != base.dims.resources
    {
        return Err(BwkError::config(format!(
            "trace dimensions {dims:?} do not match the configuration {:?}",
            base.dims
        )));
    }
    if config.batch_len == 0 || config.batch_len > dims.horizon {
        return Err(BwkError::config("batch length outside 1..=T"));
    }
    let count = config.batch_count();
    if batch_seeds.len() != count {
        return Err(BwkError::config(format!(
            "{} batch seeds supplied for {count} batches",
            batch_seeds.len()
        )));
    }
    let rho = dims.rho();
    let env = SeedStream::new(split(seed, tags::ENV, 0));
    let mut history = History::new();
    let mut log = Vec::new();
    let mut consumption = vec![0.0; dims.resources];
    let mut total_reward = 0.0;
    let mut batches = Vec::with_capacity(count);

    for (j, learner_seed) in batch_seeds.iter().enumerate() {
        let start = j * config.batch_len + 1;
        let len = config.batch_len.min(dims.horizon - start + 1);
        let budget = batch_budget(rho, len);
        let out = play_window(
            trace,
            &mut history,
            start,
            len,
            budget,
            base,
            *learner_seed,
            &env,
            &mut log,
        )?;
        for (total, used) in consumption.iter_mut().zip(&out.consumed) {
            *total += used;
        }
        total_reward += out.reward;
        batches.push(BatchSummary {
            batch: j + 1,
            start,
            len,
            budget,
            reward: out.reward,
            consumed_max: out.consumed.iter().cloned().fold(0.0, f64::max),
            rounds_played: out.rounds_played,
        });
    }
    trace.materialize_remaining(&history)?;
    Ok(BwkRunResult {
        stopping_round: history.last().map_or(0, |r| r.round),
        total_reward,
        consumption,
        budget: dims.budget,
        history,
        log,
        batches,
    })
}

/// Writes batch accounting as `batch,start_t,len,budget,rew,consumed_max`.
pub fn write_batch_summary_csv<W: Write>(batches: &[BatchSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["batch", "start_t", "len", "budget", "rew", "consumed_max"])?;
    for b in batches {
        w.write_record([
            b.batch.to_string(),
            b.start.to_string(),
            b.len.to_string(),
            b.budget.to_string(),
            b.reward.to_string(),
            b.consumed_max.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
