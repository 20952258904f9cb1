//! Trace generators: stochastic, oscillating stationary, adaptive price, and
//! the lower-bound construction.

use std::sync::Arc;

use crate::env::{
    AdaptiveRule, EnvironmentTrace, History, ProblemDims, Realization, RoundExpectations,
};
use crate::error::{BwkError, Result};

fn check_unit(what: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || v.is_nan() {
        return Err(BwkError::validation(format!("{what} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// Checks per-action means `r` (length `K`) and `c` (`d` rows of length `K`);
/// the null column must be zero.
fn check_means(r: &[f64], c: &[Vec<f64>]) -> Result<()> {
    if r.is_empty() {
        return Err(BwkError::validation("need at least the null action"));
    }
    if c.is_empty() {
        return Err(BwkError::validation("need at least one resource"));
    }
    for v in r {
        check_unit("reward", *v)?;
    }
    for row in c {
        if row.len() != r.len() {
            return Err(BwkError::validation(format!(
                "consumption row has {} entries, expected {}",
                row.len(),
                r.len()
            )));
        }
        for v in row {
            check_unit("consumption", *v)?;
        }
    }
    if r[0] != 0.0 || c.iter().any(|row| row[0] != 0.0) {
        return Err(BwkError::validation("the null action (index 0) must have zero reward and consumption"));
    }
    Ok(())
}

/// Time-constant expectations `r(a)`, `c_i(a)`.
pub fn make_stochastic(
    r: &[f64],
    c: &[Vec<f64>],
    horizon: usize,
    budget: f64,
    realization: Realization,
) -> Result<EnvironmentTrace> {
    check_means(r, c)?;
    let dims = ProblemDims::new(horizon, r.len(), c.len(), budget)?;
    let k = r.len();
    let mut rewards = Vec::with_capacity(horizon * k);
    let mut consumptions = Vec::with_capacity(horizon * k * c.len());
    for _ in 0..horizon {
        rewards.extend_from_slice(r);
        for row in c {
            consumptions.extend_from_slice(row);
        }
    }
    EnvironmentTrace::from_matrices(dims, rewards, consumptions, realization)
}

/// Triangle wave over one period: 0 at phase 0, 1 at phase `period / 2`.
pub fn triangle_wave(phase: usize, period: usize) -> f64 {
    let k = phase % period;
    let half = period / 2;
    if k <= half {
        k as f64 / half as f64
    } else {
        (period - k) as f64 / (period - half) as f64
    }
}

/// `M (g + sigma (1 - g))`: equals `M sigma` at `g = 0` and `M` at `g = 1` exactly.
fn modulate(peak: f64, sigma: f64, g: f64) -> f64 {
    peak * (g + sigma * (1.0 - g))
}

/// Parameters of [`make_oscillating_stationary`].
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatingSpec {
    pub sigma_r: f64,
    pub sigma_c: f64,
    /// Peak reward per action; index 0 must be zero.
    pub peak_rewards: Vec<f64>,
    /// Peak consumption per resource and action.
    pub peak_consumptions: Vec<Vec<f64>>,
    pub period: usize,
    pub horizon: usize,
    pub budget: f64,
}

/// Schedules oscillating between `sigma * peak` and `peak` with triangle
/// waves. Every entry has its own phase offset, and each wave reaches both
/// endpoints once per period, so a trace covering a full period measures
/// exactly `(sigma_r, sigma_c)`.
pub fn make_oscillating_stationary(spec: &OscillatingSpec, realization: Realization) -> Result<EnvironmentTrace> {
    check_unit("sigma_r", spec.sigma_r)?;
    check_unit("sigma_c", spec.sigma_c)?;
    check_means(&spec.peak_rewards, &spec.peak_consumptions)?;
    if spec.period < 2 {
        return Err(BwkError::validation(format!("period must be at least 2, got {}", spec.period)));
    }
    let k = spec.peak_rewards.len();
    let d = spec.peak_consumptions.len();
    let dims = ProblemDims::new(spec.horizon, k, d, spec.budget)?;
    let p = spec.period;
    let lanes = k * (d + 1) + 1;
    let phase = |a: usize, entry: usize| ((a * (d + 1) + entry) * p) / lanes;
    let mut rewards = Vec::with_capacity(spec.horizon * k);
    let mut consumptions = Vec::with_capacity(spec.horizon * k * d);
    for t in 0..spec.horizon {
        for a in 0..k {
            let g = triangle_wave(t + phase(a, 0), p);
            rewards.push(modulate(spec.peak_rewards[a], spec.sigma_r, g));
        }
        for (i, row) in spec.peak_consumptions.iter().enumerate() {
            for a in 0..k {
                let h = triangle_wave(t + phase(a, i + 1), p);
                consumptions.push(modulate(row[a], spec.sigma_c, h));
            }
        }
    }
    EnvironmentTrace::from_matrices(dims, rewards, consumptions, realization)
}

/// Prices that rise with the player's recent spending.
///
/// With `s` the mean realized peak consumption over the last `window`
/// rounds (unplayed rounds count as zero spend), the price of action `a` on
/// resource `i` is `min(b (1 + responsiveness * s), H)` where `b` is the base
/// price and `H = min(1, b (1 + responsiveness), b / floor_ratio)`. Prices
/// therefore stay in `[b, H]`, so their min/max ratio is at least `floor_ratio`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptivePriceRule {
    rewards: Vec<f64>,
    base: Vec<Vec<f64>>,
    caps: Vec<Vec<f64>>,
    responsiveness: f64,
    window: usize,
}

impl AdaptivePriceRule {
    pub fn new(
        rewards: Vec<f64>,
        base_prices: Vec<Vec<f64>>,
        responsiveness: f64,
        floor_ratio: f64,
        window: usize,
    ) -> Result<Self> {
        check_means(&rewards, &base_prices)?;
        check_unit("floor ratio", floor_ratio)?;
        if !responsiveness.is_finite() || responsiveness < 0.0 {
            return Err(BwkError::validation(format!(
                "responsiveness must be non-negative, got {responsiveness}"
            )));
        }
        if window == 0 {
            return Err(BwkError::validation("spend window must be at least one round"));
        }
        let caps = base_prices
            .iter()
            .map(|row| {
                row.iter()
                    .map(|b| {
                        let mut cap = (b * (1.0 + responsiveness)).min(1.0);
                        if floor_ratio > 0.0 {
                            cap = cap.min(b / floor_ratio);
                        }
                        cap.max(*b)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            rewards,
            base: base_prices,
            caps,
            responsiveness,
            window,
        })
    }

    /// Mean realized peak consumption over rounds `[round - window, round - 1]`.
    pub fn spend_signal(&self, round: usize, history: &History) -> f64 {
        let from = round.saturating_sub(self.window).max(1);
        if round <= 1 {
            return 0.0;
        }
        let spent: f64 = history
            .in_rounds(from, round - 1)
            .iter()
            .map(|rec| rec.consumption.iter().cloned().fold(0.0, f64::max))
            .sum();
        spent / self.window as f64
    }
}

impl AdaptiveRule for AdaptivePriceRule {
    fn expectations(&self, round: usize, history: &History, out: RoundExpectations<'_>) {
        let k = self.rewards.len();
        out.rewards.copy_from_slice(&self.rewards);
        let lift = 1.0 + self.responsiveness * self.spend_signal(round, history);
        for (i, (base, caps)) in self.base.iter().zip(&self.caps).enumerate() {
            for a in 0..k {
                out.consumptions[i * k + a] = (base[a] * lift).min(caps[a]);
            }
        }
    }
}

/// An adaptive trace driven by an [`AdaptivePriceRule`].
pub fn make_adaptive_price(
    rule: AdaptivePriceRule,
    horizon: usize,
    budget: f64,
    realization: Realization,
) -> Result<EnvironmentTrace> {
    let dims = ProblemDims::new(horizon, rule.rewards.len(), rule.base.len(), budget)?;
    EnvironmentTrace::adaptive(dims, realization, Arc::new(rule))
}

/// Which expression defines the first batch's share `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YBranch {
    /// `y = rho`, for `sigma_r <= rho`.
    Adversarial,
    /// `y = sqrt(rho sigma_r)`, for `rho <= sigma_r <= rho / sigma_c^2`.
    Intermediate,
    /// `y = rho / sigma_c`, for `sigma_r >= rho / sigma_c^2`.
    Stationary,
}

/// The lower-bound construction's parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpossibilityParams {
    pub rho: f64,
    pub sigma_r: f64,
    pub sigma_c: f64,
    pub epsilon: f64,
    pub horizon: usize,
    branch: YBranch,
    y: f64,
    arms: usize,
}

impl ImpossibilityParams {
    /// Picks the branch of `y` from `(rho, sigma_r, sigma_c)`.
    pub fn new(rho: f64, sigma_r: f64, sigma_c: f64, epsilon: f64, horizon: usize) -> Result<Self> {
        let branch = if sigma_r <= rho {
            YBranch::Adversarial
        } else if sigma_c == 0.0 || sigma_r <= rho / (sigma_c * sigma_c) {
            YBranch::Intermediate
        } else {
            YBranch::Stationary
        };
        Self::with_branch(rho, sigma_r, sigma_c, epsilon, horizon, branch)
    }

    /// Forces the branch used for `y`.
    pub fn with_branch(
        rho: f64,
        sigma_r: f64,
        sigma_c: f64,
        epsilon: f64,
        horizon: usize,
        branch: YBranch,
    ) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(BwkError::validation(format!("rho must lie in (0, 1), got {rho}")));
        }
        check_unit("sigma_r", sigma_r)?;
        check_unit("sigma_c", sigma_c)?;
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(BwkError::validation(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        if horizon == 0 {
            return Err(BwkError::validation("horizon must be positive"));
        }
        let y = match branch {
            YBranch::Adversarial => rho,
            YBranch::Intermediate => (rho * sigma_r).sqrt(),
            YBranch::Stationary => {
                if sigma_c == 0.0 {
                    return Err(BwkError::validation(
                        "the sigma_r >= rho / sigma_c^2 branch needs sigma_c > 0",
                    ));
                }
                rho / sigma_c
            }
        };
        if !(y >= rho && y < 1.0) {
            return Err(BwkError::validation(format!(
                "first-batch share y = {y} must lie in [rho, 1) for branch {branch:?}"
            )));
        }
        let arms = 1 + ((1.0 - y) / rho - 1e-12).ceil().max(1.0) as usize;
        Ok(Self {
            rho,
            sigma_r,
            sigma_c,
            epsilon,
            horizon,
            branch,
            y,
            arms,
        })
    }

    pub fn branch(&self) -> YBranch {
        self.branch
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Non-null arms of the construction, `1 + ceil((1 - y) / rho)`.
    pub fn arms(&self) -> usize {
        self.arms
    }

    /// Share of each later batch, `(1 - y) / (arms - 1)`.
    pub fn z(&self) -> f64 {
        (1.0 - self.y) / (self.arms - 1) as f64
    }

    pub fn budget(&self) -> f64 {
        self.rho * self.horizon as f64
    }

    /// `(first round, length)` of every batch; batch `b` is `bounds[b - 1]`.
    pub fn batch_bounds(&self) -> Vec<(usize, usize)> {
        let t = self.horizon as f64;
        let mut out = Vec::with_capacity(self.arms);
        let mut next = 1;
        for b in 1..=self.arms {
            let share = if b == 1 { self.y } else { self.z() };
            let want = (t * share - 1e-9).ceil().max(0.0) as usize;
            let len = want.min(self.horizon + 1 - next);
            out.push((next, len));
            next += len;
        }
        out
    }

    /// Number of outcomes, `arms + 1`.
    pub fn outcomes(&self) -> usize {
        self.arms + 1
    }

    fn check_outcome(&self, q: usize) -> Result<()> {
        if q == 0 || q > self.outcomes() {
            return Err(BwkError::Range {
                what: "outcome",
                value: q,
                lo: 1,
                hi: self.outcomes(),
            });
        }
        Ok(())
    }
}

/// The lower-bound trace for outcome `q` in `1..=arms + 1` (one resource,
/// `arms + 1` actions with action 0 null).
///
/// Batch 1 is identical across outcomes. In outcome `q <= arms`, action
/// `b` pays `(epsilon^(arms-b), 1)` during batch `b` for `2 <= b <= q`; in
/// outcome `arms + 1`, action 1 keeps paying a `sigma_r` fraction of its
/// reward after batch 1 at consumption `min(1, (rho / y) / sigma_c)`.
pub fn make_impossibility(params: &ImpossibilityParams, q: usize, realization: Realization) -> Result<EnvironmentTrace> {
    params.check_outcome(q)?;
    let kc = params.arms;
    let k = kc + 1;
    let dims = ProblemDims::new(params.horizon, k, 1, params.budget())?;
    let mut trace = EnvironmentTrace::zeros(dims, realization)?;
    let eps = params.epsilon;
    let top = eps.powi(kc as i32 - 1);
    let first_cost = params.rho / params.y;
    let bounds = params.batch_bounds();
    let (s1, l1) = bounds[0];
    for t in s1..s1 + l1 {
        trace.set_reward(t, 1, top)?;
        trace.set_consumption(t, 0, 1, first_cost)?;
    }
    if q <= kc {
        for (idx, (start, len)) in bounds.iter().enumerate().skip(1) {
            let b = idx + 1;
            if b > q {
                break;
            }
            let reward = eps.powi((kc - b) as i32);
            for t in *start..*start + *len {
                trace.set_reward(t, b, reward)?;
                trace.set_consumption(t, 0, b, 1.0)?;
            }
        }
    } else {
        let tail_cost = if params.sigma_c == 0.0 {
            1.0
        } else {
            (first_cost / params.sigma_c).min(1.0)
        };
        for t in s1 + l1..=params.horizon {
            trace.set_reward(t, 1, params.sigma_r * top)?;
            trace.set_consumption(t, 0, 1, tail_cost)?;
        }
    }
    Ok(trace)
}

/// `OPT_FD` of outcome `q` with unrounded batch lengths:
/// `T max(epsilon^(arms-1) y, epsilon^(arms-q) z)` for `2 <= q <= arms`, and
/// `T epsilon^(arms-1) y` for `q = 1` and `q = arms + 1`.
pub fn impossibility_opt(params: &ImpossibilityParams, q: usize) -> Result<f64> {
    params.check_outcome(q)?;
    let kc = params.arms;
    let t = params.horizon as f64;
    let first = params.epsilon.powi(kc as i32 - 1) * t * params.y;
    if q == 1 || q == kc + 1 {
        return Ok(first);
    }
    let later = params.epsilon.powi((kc - q) as i32) * t * params.z();
    Ok(first.max(later))
}
