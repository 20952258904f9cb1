//! The Lagrangian BwK player.
//!
//! A maximizer over actions and a minimizer over `{0} ∪ [d]` play the
//! zero-sum game with payoff
//!
//! ```text
//! L_t(a, i) = R_t(a) + (1/rho) 1{i != 0} (rho - C_{t,i}(a))
//! ```
//!
//! The maximizer (EXP3.P) sees only `L_t(A_t, I_t)`; the minimizer (Hedge)
//! sees `L_t(A_t, i)` for every `i`. Play continues while the budget lasts.

use std::io::Write;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::env::seed::{split, tags};
use crate::env::{EnvironmentTrace, History, HistoryRecord, ProblemDims, SeedStream};
use crate::error::{BwkError, Result};
use crate::learners::{Exp3P, Exp3PParams, Hedge};
use crate::restart::BatchSummary;

/// Slack for floating-point round-off when checking the Lagrangian range.
const RANGE_SLACK: f64 = 1e-9;

/// What the action player observes each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeedbackMode {
    /// Only the payoff of the played action (EXP3.P maximizer).
    #[default]
    Bandit,
    /// Payoffs of every action (Hedge maximizer).
    FullInformation,
}

impl std::str::FromStr for FeedbackMode {
    type Err = BwkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bandit" => Ok(FeedbackMode::Bandit),
            "full" | "full_information" | "full-information" => Ok(FeedbackMode::FullInformation),
            other => Err(BwkError::config(format!("unknown feedback mode `{other}`"))),
        }
    }
}

/// Learner parameter overrides. `None` means tuned to the run's horizon.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LearnerTuning {
    pub exp3p: Option<Exp3PParams>,
    /// Rate of the resource player.
    pub hedge_eta: Option<f64>,
    /// Rate of the action player under full information.
    pub action_hedge_eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeConfig {
    pub dims: ProblemDims,
    /// Confidence parameter; split evenly over the learners' high-probability events.
    pub delta: f64,
    pub tuning: LearnerTuning,
    pub feedback: FeedbackMode,
}

impl LagrangeConfig {
    pub fn new(dims: ProblemDims, delta: f64) -> Result<Self> {
        dims.validate()?;
        if !(delta > 0.0 && delta < 1.0) {
            return Err(BwkError::config(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(Self {
            dims,
            delta,
            tuning: LearnerTuning::default(),
            feedback: FeedbackMode::Bandit,
        })
    }

    pub fn with_feedback(mut self, feedback: FeedbackMode) -> Self {
        self.feedback = feedback;
        self
    }

    pub fn with_tuning(mut self, tuning: LearnerTuning) -> Self {
        self.tuning = tuning;
        self
    }
}

/// One line of the per-round diagnostic log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundLog {
    pub round: usize,
    pub action: usize,
    /// `I_t`: 0 for the zero multiplier, `i` for resource `i`.
    pub resource: usize,
    pub reward: f64,
    pub max_consumption: f64,
    pub lagrangian: f64,
}

/// One episode of play.
#[derive(Debug, Clone, PartialEq)]
pub struct BwkRunResult {
    pub history: History,
    /// `T_A`: the last round in which reward was collected (0 if none).
    pub stopping_round: usize,
    /// `REW`: total realized reward.
    pub total_reward: f64,
    /// Cumulative realized consumption per resource.
    pub consumption: Vec<f64>,
    /// Budget the run was held to.
    pub budget: f64,
    pub log: Vec<RoundLog>,
    /// Restart batches; a single entry for an unrestarted run.
    pub batches: Vec<BatchSummary>,
}

impl BwkRunResult {
    pub fn max_consumption(&self) -> f64 {
        self.consumption.iter().cloned().fold(0.0, f64::max)
    }

    /// True when no resource went over the budget.
    pub fn within_budget(&self) -> bool {
        self.consumption.iter().all(|c| *c <= self.budget)
    }
}

/// `L_t(a, i)` from the realized reward and consumptions of one action.
pub fn lagrangian_value(reward: f64, consumption: &[f64], i: usize, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(BwkError::validation(format!("rho must lie in (0, 1], got {rho}")));
    }
    if i > consumption.len() {
        return Err(BwkError::Range {
            what: "multiplier index",
            value: i,
            lo: 0,
            hi: consumption.len(),
        });
    }
    Ok(lagrangian(reward, consumption, i, rho))
}

#[inline]
fn lagrangian(reward: f64, consumption: &[f64], i: usize, rho: f64) -> f64 {
    if i == 0 {
        reward
    } else {
        reward + (rho - consumption[i - 1]) / rho
    }
}

/// Affine map of `[1 - 1/rho, 2]` onto `[0, 1]`.
pub fn scale_lagrangian_to_unit(value: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(BwkError::validation(format!("rho must lie in (0, 1], got {rho}")));
    }
    let lo = 1.0 - 1.0 / rho;
    if value < lo - RANGE_SLACK || value > 2.0 + RANGE_SLACK {
        return Err(BwkError::validation(format!(
            "Lagrangian {value} outside [{lo}, 2]"
        )));
    }
    Ok(scale(value, rho))
}

#[inline]
fn scale(value: f64, rho: f64) -> f64 {
    ((value - (1.0 - 1.0 / rho)) / (1.0 + 1.0 / rho)).clamp(0.0, 1.0)
}

enum Maximizer {
    Bandit(Exp3P),
    Full(Hedge),
}

/// Totals of one contiguous block of play.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct WindowOutcome {
    pub rounds_played: usize,
    pub reward: f64,
    pub consumed: Vec<f64>,
}

/// Runs a fresh Lagrangian player on rounds `start..start + len` with its own budget.
///
/// The player's `rho` is `budget / len`. A non-positive budget plays nothing.
/// Rounds of the window that are not played are still materialized so later
/// windows can proceed.
#[allow(clippy::too_many_arguments)]
pub(crate) fn play_window(
    trace: &mut EnvironmentTrace,
    history: &mut History,
    start: usize,
    len: usize,
    budget: f64,
    config: &LagrangeConfig,
    learner_seed: u64,
    env: &SeedStream,
    log: &mut Vec<RoundLog>,
) -> Result<WindowOutcome> {
    let dims = *trace.dims();
    let k = dims.actions;
    let d = dims.resources;
    let end = start + len - 1;
    let mut out = WindowOutcome {
        rounds_played: 0,
        reward: 0.0,
        consumed: vec![0.0; d],
    };
    if budget > 0.0 && len > 0 {
        let rho = (budget / len as f64).min(1.0);
        let tuning = &config.tuning;
        let mut maximizer = match config.feedback {
            FeedbackMode::Bandit => Maximizer::Bandit(Exp3P::new(
                k,
                tuning
                    .exp3p
                    .unwrap_or_else(|| Exp3PParams::tuned(k, len, config.delta / 3.0)),
            )?),
            FeedbackMode::FullInformation => Maximizer::Full(Hedge::new(
                k,
                tuning.action_hedge_eta.unwrap_or_else(|| Hedge::tuned_eta(k, len)),
            )?),
        };
        let mut minimizer = Hedge::new(
            d + 1,
            tuning.hedge_eta.unwrap_or_else(|| Hedge::tuned_eta(d + 1, len)),
        )?;
        let mut max_rng = ChaCha8Rng::seed_from_u64(split(learner_seed, tags::MAXIMIZER, 0));
        let mut min_rng = ChaCha8Rng::seed_from_u64(split(learner_seed, tags::MINIMIZER, 0));
        let mut losses = vec![0.0; d + 1];
        let mut action_losses = vec![0.0; k];

        for t in start..=end {
            let (action, prob) = match &maximizer {
                Maximizer::Bandit(m) => m.sample(&mut max_rng),
                Maximizer::Full(m) => (m.sample(&mut max_rng), 1.0),
            };
            let multiplier = minimizer.sample(&mut min_rng);
            let sample = trace.sample_round(history, t, action, env)?;

            if sample
                .consumption
                .iter()
                .zip(&out.consumed)
                .any(|(c, used)| used + c > budget)
            {
                break;
            }
            for (used, c) in out.consumed.iter_mut().zip(&sample.consumption) {
                *used += c;
            }
            out.reward += sample.reward;
            out.rounds_played += 1;

            for (i, loss) in losses.iter_mut().enumerate() {
                *loss = scale(lagrangian(sample.reward, &sample.consumption, i, rho), rho);
            }
            let payoff = lagrangian(sample.reward, &sample.consumption, multiplier, rho);
            debug_assert!(payoff >= 1.0 - 1.0 / rho - RANGE_SLACK && payoff <= 2.0 + RANGE_SLACK);
            match &mut maximizer {
                Maximizer::Bandit(m) => m.update(action, scale(payoff, rho), prob)?,
                Maximizer::Full(m) => {
                    for (a, loss) in action_losses.iter_mut().enumerate() {
                        let value = if a == action {
                            payoff
                        } else {
                            let (r, c) = trace.realize(t, a, env);
                            lagrangian(r, &c, multiplier, rho)
                        };
                        *loss = 1.0 - scale(value, rho);
                    }
                    m.update(&action_losses)?;
                }
            }
            minimizer.update(&losses)?;

            log.push(RoundLog {
                round: t,
                action,
                resource: multiplier,
                reward: sample.reward,
                max_consumption: sample.consumption.iter().cloned().fold(0.0, f64::max),
                lagrangian: payoff,
            });
            history.push(HistoryRecord {
                round: t,
                action,
                reward: sample.reward,
                consumption: sample.consumption,
            });
        }
    }
    if trace.is_adaptive() {
        for t in start..=end {
            trace.materialize_round(t, history)?;
        }
    }
    Ok(out)
}

/// Runs the Lagrangian player over the whole horizon.
///
/// `budget_override` replaces `B` (it may not exceed it). On adaptive traces
/// the rounds after the stop are materialized as null plays, so the trace is
/// complete on return.
pub fn run_algorithm1(
    trace: &mut EnvironmentTrace,
    config: &LagrangeConfig,
    budget_override: Option<f64>,
    seed: u64,
) -> Result<BwkRunResult> {
    let dims = *trace.dims();
    if dims.horizon != config.dims.horizon
        || dims.actions != config.dims.actions
        || dims.resources != config.dims.resources
    {
        return Err(BwkError::config(format!(
            "trace dimensions {dims:?} do not match the configuration {:?}",
            config.dims
        )));
    }
    let budget = match budget_override {
        Some(b) if !(b.is_finite() && b >= 0.0) => {
            return Err(BwkError::config(format!("budget override {b} is invalid")))
        }
        Some(b) if b > dims.budget => {
            return Err(BwkError::config(format!(
                "budget override {b} exceeds the instance budget {}",
                dims.budget
            )))
        }
        Some(b) => b,
        None => dims.budget,
    };
    let env = SeedStream::new(split(seed, tags::ENV, 0));
    let mut history = History::new();
    let mut log = Vec::new();
    let outcome = play_window(
        trace,
        &mut history,
        1,
        dims.horizon,
        budget,
        config,
        split(seed, tags::LEARNERS, 0),
        &env,
        &mut log,
    )?;
    trace.materialize_remaining(&history)?;
    let batch = BatchSummary {
        batch: 1,
        start: 1,
        len: dims.horizon,
        budget,
        reward: outcome.reward,
        consumed_max: outcome.consumed.iter().cloned().fold(0.0, f64::max),
        rounds_played: outcome.rounds_played,
    };
    Ok(BwkRunResult {
        stopping_round: outcome.rounds_played,
        total_reward: outcome.reward,
        consumption: outcome.consumed,
        budget,
        history,
        log,
        batches: vec![batch],
    })
}

/// Writes the diagnostic log as `t,A_t,I_t,R,Cmax,L`.
pub fn write_round_log_csv<W: Write>(log: &[RoundLog], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "A_t", "I_t", "R", "Cmax", "L"])?;
    for r in log {
        w.write_record([
            r.round.to_string(),
            r.action.to_string(),
            r.resource.to_string(),
            r.reward.to_string(),
            r.max_consumption.to_string(),
            r.lagrangian.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
