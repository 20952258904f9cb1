//! The world model: horizon, resources, budgets, expected and realized
//! rewards/consumptions, play history and stationarity measurement.
//!
//! Rounds are 1-based in every public signature. Action 0 is the null action:
//! it never earns reward and never consumes anything.

mod io;
pub mod seed;

use std::fmt;
use std::sync::Arc;

use crate::error::{BwkError, Result};

pub use io::{read_trace_csv, write_trace_csv};
pub use seed::SeedStream;

/// Tolerance for probability vectors summing to one.
pub const DIST_TOLERANCE: f64 = 1e-12;

/// Sizes of one BwK instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemDims {
    /// Number of rounds `T`.
    pub horizon: usize,
    /// Number of actions `K`, including the null action at index 0.
    pub actions: usize,
    /// Number of resources `d`.
    pub resources: usize,
    /// Per-resource budget `B`.
    pub budget: f64,
}

impl ProblemDims {
    pub fn new(horizon: usize, actions: usize, resources: usize, budget: f64) -> Result<Self> {
        let dims = Self {
            horizon,
            actions,
            resources,
            budget,
        };
        dims.validate()?;
        Ok(dims)
    }

    /// Builds dimensions from a per-round budget rate, `B = rho * T`.
    pub fn with_rate(horizon: usize, actions: usize, resources: usize, rho: f64) -> Result<Self> {
        Self::new(horizon, actions, resources, rho * horizon as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(BwkError::validation("horizon T must be positive"));
        }
        if self.actions == 0 {
            return Err(BwkError::validation("action count K must be at least 1"));
        }
        if self.resources == 0 {
            return Err(BwkError::validation("resource count d must be positive"));
        }
        if !self.budget.is_finite() || self.budget < 0.0 {
            return Err(BwkError::validation(format!(
                "budget B must be finite and non-negative, got {}",
                self.budget
            )));
        }
        let rho = self.rho();
        if rho > 1.0 + 1e-12 {
            return Err(BwkError::validation(format!(
                "per-round budget rho = B/T must lie in [0, 1], got {rho}"
            )));
        }
        Ok(())
    }

    /// Per-round budget `rho = B / T`.
    pub fn rho(&self) -> f64 {
        self.budget / self.horizon as f64
    }
}

/// How realized values are drawn from their expectations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Realization {
    /// Realized value equals the expectation.
    Deterministic,
    /// Each realized value is an independent 0/1 draw with the expected mean.
    #[default]
    Bernoulli,
}

impl std::str::FromStr for Realization {
    type Err = BwkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "deterministic" => Ok(Realization::Deterministic),
            "bernoulli" => Ok(Realization::Bernoulli),
            other => Err(BwkError::config(format!("unknown realization kind `{other}`"))),
        }
    }
}

/// One round's expectations, produced lazily by an adaptive adversary.
///
/// `rewards` has length `K`; `consumptions` has length `d * K` with resource
/// `i` (0-based) of action `a` at `i * K + a`. Both arrive zeroed.
pub struct RoundExpectations<'a> {
    pub rewards: &'a mut [f64],
    pub consumptions: &'a mut [f64],
}

/// A rule mapping the history `H_{t-1}` to round-`t` expectations.
///
/// Implementations must be pure functions of `(round, history)`. Rounds that
/// are absent from the history were not played, which is the same as the
/// player choosing the null action.
pub trait AdaptiveRule: Send + Sync + fmt::Debug {
    fn expectations(&self, round: usize, history: &History, out: RoundExpectations<'_>);
}

/// Expected rewards `r_t(a)` and consumptions `c_{t,i}(a)` for every round.
#[derive(Clone)]
pub struct EnvironmentTrace {
    dims: ProblemDims,
    rewards: Vec<f64>,
    consumptions: Vec<f64>,
    realization: Realization,
    rule: Option<Arc<dyn AdaptiveRule>>,
    materialized: usize,
}

impl fmt::Debug for EnvironmentTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EnvironmentTrace")
            .field("dims", &self.dims)
            .field("realization", &self.realization)
            .field("adaptive", &self.rule.is_some())
            .field("materialized", &self.materialized)
            .finish()
    }
}

/// Outcome of playing one action in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSample {
    pub reward: f64,
    pub consumption: Vec<f64>,
    /// `r_t(a)` of the played action.
    pub expected_reward: f64,
    /// `c_{t,i}(a)` of the played action, one entry per resource.
    pub expected_consumption: Vec<f64>,
}

impl EnvironmentTrace {
    /// An oblivious trace with every expectation zero.
    pub fn zeros(dims: ProblemDims, realization: Realization) -> Result<Self> {
        dims.validate()?;
        let cells = dims.horizon * dims.actions;
        Ok(Self {
            dims,
            rewards: vec![0.0; cells],
            consumptions: vec![0.0; cells * dims.resources],
            realization,
            rule: None,
            materialized: dims.horizon,
        })
    }

    /// An oblivious trace from row-major matrices.
    ///
    /// `rewards[(t-1) * K + a]` and `consumptions[((t-1) * d + i) * K + a]`.
    pub fn from_matrices(
        dims: ProblemDims,
        rewards: Vec<f64>,
        consumptions: Vec<f64>,
        realization: Realization,
    ) -> Result<Self> {
        dims.validate()?;
        let cells = dims.horizon * dims.actions;
        if rewards.len() != cells || consumptions.len() != cells * dims.resources {
            return Err(BwkError::validation(format!(
                "matrix sizes ({}, {}) do not match T*K = {cells} and T*d*K = {}",
                rewards.len(),
                consumptions.len(),
                cells * dims.resources
            )));
        }
        let trace = Self {
            dims,
            rewards,
            consumptions,
            realization,
            rule: None,
            materialized: dims.horizon,
        };
        for t in 1..=dims.horizon {
            trace.check_round_values(t)?;
        }
        Ok(trace)
    }

    /// A trace whose expectations are produced round by round by `rule`.
    pub fn adaptive(
        dims: ProblemDims,
        realization: Realization,
        rule: Arc<dyn AdaptiveRule>,
    ) -> Result<Self> {
        let mut trace = Self::zeros(dims, realization)?;
        trace.rule = Some(rule);
        trace.materialized = 0;
        Ok(trace)
    }

    pub fn dims(&self) -> &ProblemDims {
        &self.dims
    }

    pub fn realization(&self) -> Realization {
        self.realization
    }

    pub fn set_realization(&mut self, realization: Realization) {
        self.realization = realization;
    }

    /// Replaces the budget, keeping every expectation.
    pub fn with_budget(mut self, budget: f64) -> Result<Self> {
        let dims = ProblemDims {
            budget,
            ..self.dims
        };
        dims.validate()?;
        self.dims = dims;
        Ok(self)
    }

    pub fn is_adaptive(&self) -> bool {
        self.rule.is_some()
    }

    /// Number of leading rounds whose expectations are fixed.
    pub fn materialized_rounds(&self) -> usize {
        self.materialized
    }

    pub fn is_materialized(&self) -> bool {
        self.materialized == self.dims.horizon
    }

    #[inline]
    fn reward_index(&self, t: usize, a: usize) -> usize {
        (t - 1) * self.dims.actions + a
    }

    #[inline]
    fn consumption_index(&self, t: usize, i: usize, a: usize) -> usize {
        ((t - 1) * self.dims.resources + i) * self.dims.actions + a
    }

    fn check_round(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.dims.horizon {
            return Err(BwkError::Range {
                what: "round",
                value: t,
                lo: 1,
                hi: self.dims.horizon,
            });
        }
        Ok(())
    }

    fn check_action(&self, a: usize) -> Result<()> {
        if a >= self.dims.actions {
            return Err(BwkError::Range {
                what: "action",
                value: a,
                lo: 0,
                hi: self.dims.actions - 1,
            });
        }
        Ok(())
    }

    fn check_round_values(&self, t: usize) -> Result<()> {
        let k = self.dims.actions;
        for a in 0..k {
            let r = self.reward(t, a);
            if !(0.0..=1.0).contains(&r) {
                return Err(BwkError::validation(format!(
                    "reward r_{t}({a}) = {r} outside [0, 1]"
                )));
            }
            for i in 0..self.dims.resources {
                let c = self.consumption(t, i, a);
                if !(0.0..=1.0).contains(&c) {
                    return Err(BwkError::validation(format!(
                        "consumption c_{t},{}({a}) = {c} outside [0, 1]",
                        i + 1
                    )));
                }
                if a == 0 && c != 0.0 {
                    return Err(BwkError::validation(format!(
                        "null action consumes {c} of resource {} in round {t}",
                        i + 1
                    )));
                }
            }
            if a == 0 && r != 0.0 {
                return Err(BwkError::validation(format!(
                    "null action has reward {r} in round {t}"
                )));
            }
        }
        Ok(())
    }

    /// Sets `r_t(a)`. Only valid on oblivious traces.
    pub fn set_reward(&mut self, t: usize, a: usize, value: f64) -> Result<()> {
        self.check_writable(t, a)?;
        if !(0.0..=1.0).contains(&value) || (a == 0 && value != 0.0) {
            return Err(BwkError::validation(format!(
                "invalid reward {value} for action {a} in round {t}"
            )));
        }
        let idx = self.reward_index(t, a);
        self.rewards[idx] = value;
        Ok(())
    }

    /// Sets `c_{t,i}(a)` for the 0-based resource index `i`. Only valid on oblivious traces.
    pub fn set_consumption(&mut self, t: usize, i: usize, a: usize, value: f64) -> Result<()> {
        self.check_writable(t, a)?;
        if i >= self.dims.resources {
            return Err(BwkError::Range {
                what: "resource",
                value: i,
                lo: 0,
                hi: self.dims.resources - 1,
            });
        }
        if !(0.0..=1.0).contains(&value) || (a == 0 && value != 0.0) {
            return Err(BwkError::validation(format!(
                "invalid consumption {value} for action {a}, resource {} in round {t}",
                i + 1
            )));
        }
        let idx = self.consumption_index(t, i, a);
        self.consumptions[idx] = value;
        Ok(())
    }

    fn check_writable(&self, t: usize, a: usize) -> Result<()> {
        if self.rule.is_some() {
            return Err(BwkError::validation(
                "expectations of an adaptive trace are written by its rule only",
            ));
        }
        self.check_round(t)?;
        self.check_action(a)
    }

    /// Expected reward `r_t(a)`.
    #[inline]
    pub fn reward(&self, t: usize, a: usize) -> f64 {
        self.rewards[self.reward_index(t, a)]
    }

    /// Expected consumption `c_{t,i}(a)` of the 0-based resource `i`.
    #[inline]
    pub fn consumption(&self, t: usize, i: usize, a: usize) -> f64 {
        self.consumptions[self.consumption_index(t, i, a)]
    }

    /// `E_{a~dist}[r_t(a)]`.
    pub fn mixed_reward(&self, t: usize, dist: &[f64]) -> f64 {
        let base = self.reward_index(t, 0);
        dot(&self.rewards[base..base + self.dims.actions], dist)
    }

    /// `E_{a~dist}[c_{t,i}(a)]`.
    pub fn mixed_consumption(&self, t: usize, i: usize, dist: &[f64]) -> f64 {
        let base = self.consumption_index(t, i, 0);
        dot(&self.consumptions[base..base + self.dims.actions], dist)
    }

    /// Fixes the expectations of round `t` from the rule, if the trace is adaptive.
    ///
    /// Rounds must be materialized in order; an already-fixed round is never rewritten.
    pub fn materialize_round(&mut self, t: usize, history: &History) -> Result<()> {
        self.check_round(t)?;
        if t <= self.materialized {
            return Ok(());
        }
        if t != self.materialized + 1 {
            return Err(BwkError::validation(format!(
                "round {t} requested before round {} was materialized",
                self.materialized + 1
            )));
        }
        let Some(rule) = self.rule.clone() else {
            return Ok(());
        };
        let k = self.dims.actions;
        let d = self.dims.resources;
        let rb = self.reward_index(t, 0);
        let cb = self.consumption_index(t, 0, 0);
        let mut rewards = vec![0.0; k];
        let mut consumptions = vec![0.0; k * d];
        rule.expectations(
            t,
            history,
            RoundExpectations {
                rewards: &mut rewards,
                consumptions: &mut consumptions,
            },
        );
        rewards[0] = 0.0;
        for i in 0..d {
            consumptions[i * k] = 0.0;
        }
        self.rewards[rb..rb + k].copy_from_slice(&rewards);
        self.consumptions[cb..cb + k * d].copy_from_slice(&consumptions);
        self.check_round_values(t)?;
        self.materialized = t;
        Ok(())
    }

    /// Materializes every remaining round, treating unplayed rounds as null plays.
    pub fn materialize_remaining(&mut self, history: &History) -> Result<()> {
        while self.materialized < self.dims.horizon {
            let t = self.materialized + 1;
            self.materialize_round(t, history)?;
        }
        Ok(())
    }

    /// Realized `(reward, consumptions)` of action `a` in round `t`.
    ///
    /// The round must be materialized. Draws are keyed by `(t, a, entry)` so
    /// they do not depend on which other entries were drawn.
    pub fn realize(&self, t: usize, a: usize, stream: &SeedStream) -> (f64, Vec<f64>) {
        let d = self.dims.resources;
        let mut consumption = Vec::with_capacity(d);
        let r = self.reward(t, a);
        let reward = self.draw(r, t, a, 0, stream);
        for i in 0..d {
            let c = self.consumption(t, i, a);
            consumption.push(self.draw(c, t, a, i + 1, stream));
        }
        (reward, consumption)
    }

    #[inline]
    fn draw(&self, mean: f64, t: usize, a: usize, entry: usize, stream: &SeedStream) -> f64 {
        match self.realization {
            Realization::Deterministic => mean,
            Realization::Bernoulli => {
                if stream.uniform(t, a, entry) < mean {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Plays action `a` in round `t` and returns the realized and expected values.
    ///
    /// On adaptive traces round `t` is materialized from `history` first, which
    /// requires every earlier round to be materialized already.
    pub fn sample_round(
        &mut self,
        history: &History,
        t: usize,
        a: usize,
        stream: &SeedStream,
    ) -> Result<RoundSample> {
        self.check_round(t)?;
        self.check_action(a)?;
        self.materialize_round(t, history)?;
        let (reward, consumption) = self.realize(t, a, stream);
        let expected_consumption = (0..self.dims.resources)
            .map(|i| self.consumption(t, i, a))
            .collect();
        Ok(RoundSample {
            reward,
            consumption,
            expected_reward: self.reward(t, a),
            expected_consumption,
        })
    }
}

#[inline]
pub(crate) fn dot(xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(x, y)| x * y).sum()
}

/// Checks that `dist` is a probability vector over `actions` entries.
pub fn validate_distribution(dist: &[f64], actions: usize) -> Result<()> {
    if dist.len() != actions {
        return Err(BwkError::validation(format!(
            "distribution has {} entries, expected {actions}",
            dist.len()
        )));
    }
    if dist.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(BwkError::validation("distribution has a negative or non-finite entry"));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > DIST_TOLERANCE {
        return Err(BwkError::validation(format!(
            "distribution sums to {total}, not 1"
        )));
    }
    Ok(())
}

/// One played round.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRecord {
    pub round: usize,
    pub action: usize,
    pub reward: f64,
    pub consumption: Vec<f64>,
}

/// Ordered record of the rounds played so far.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    records: Vec<HistoryRecord>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: HistoryRecord) {
        debug_assert!(self.records.last().map_or(true, |r| r.round < record.round));
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[HistoryRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&HistoryRecord> {
        self.records.last()
    }

    /// Records whose round lies in `[from, to]`.
    pub fn in_rounds(&self, from: usize, to: usize) -> &[HistoryRecord] {
        let lo = self.records.partition_point(|r| r.round < from);
        let hi = self.records.partition_point(|r| r.round <= to);
        &self.records[lo..hi.max(lo)]
    }

    pub fn total_reward(&self) -> f64 {
        self.records.iter().map(|r| r.reward).sum()
    }
}

/// Stationarity parameters `(sigma_r, sigma_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityParams {
    pub sigma_r: f64,
    pub sigma_c: f64,
}

impl StationarityParams {
    pub fn new(sigma_r: f64, sigma_c: f64) -> Result<Self> {
        for (name, v) in [("sigma_r", sigma_r), ("sigma_c", sigma_c)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(BwkError::validation(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(Self { sigma_r, sigma_c })
    }

    /// True when these parameters are at least `declared` in both coordinates, up to `tol`.
    pub fn dominates(&self, declared: &StationarityParams, tol: f64) -> bool {
        self.sigma_r >= declared.sigma_r - tol && self.sigma_c >= declared.sigma_c - tol
    }
}

/// Largest `(sigma_r, sigma_c)` the materialized rounds of `trace` satisfy.
///
/// For each action (and resource) the ratio `min_t / max_t` is taken; the
/// smallest ratio wins. A sequence whose maximum is zero contributes 1.
pub fn measure_stationarity(trace: &EnvironmentTrace) -> StationarityParams {
    let dims = trace.dims();
    let rounds = trace.materialized_rounds();
    if rounds == 0 {
        return StationarityParams {
            sigma_r: 1.0,
            sigma_c: 1.0,
        };
    }
    let ratio = |values: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = values.fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi <= 0.0 {
            1.0
        } else {
            lo / hi
        }
    };
    let mut sigma_r = 1.0_f64;
    let mut sigma_c = 1.0_f64;
    for a in 0..dims.actions {
        sigma_r = sigma_r.min(ratio(&mut (1..=rounds).map(|t| trace.reward(t, a))));
        for i in 0..dims.resources {
            sigma_c = sigma_c.min(ratio(&mut (1..=rounds).map(|t| trace.consumption(t, i, a))));
        }
    }
    StationarityParams { sigma_r, sigma_c }
}

/// Variation budget `E = sum_{t<T} max_i |E_{a~dist}[c_{t,i}(a) - c_{t+1,i}(a)]|`.
pub fn consumption_variation(trace: &EnvironmentTrace, dist: &[f64]) -> Result<f64> {
    let dims = trace.dims();
    validate_distribution(dist, dims.actions)?;
    let rounds = trace.materialized_rounds();
    let mut total = 0.0;
    for t in 1..rounds {
        let mut worst = 0.0_f64;
        for i in 0..dims.resources {
            let diff = trace.mixed_consumption(t, i, dist) - trace.mixed_consumption(t + 1, i, dist);
            worst = worst.max(diff.abs());
        }
        total += worst;
    }
    Ok(total)
}

/// `max_a E(e_a)`: a variation budget valid for every distribution, since
/// `E` is convex in the distribution.
pub fn worst_case_variation(trace: &EnvironmentTrace) -> f64 {
    let k = trace.dims().actions;
    (0..k)
        .map(|a| {
            let mut e = vec![0.0; k];
            e[a] = 1.0;
            consumption_variation(trace, &e).unwrap_or(0.0)
        })
        .fold(0.0, f64::max)
}
