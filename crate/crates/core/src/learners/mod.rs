//! No-regret primitives: Hedge (full information) and EXP3.P (bandit
//! feedback), plus the high-probability regret budgets reported for them.
//!
//! Both learners take payoffs already scaled to `[0, 1]`.

mod exp3p;
mod hedge;

pub use exp3p::{Exp3P, Exp3PParams};
pub use hedge::Hedge;

use crate::error::{BwkError, Result};

/// Inputs of the reported regret budgets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretBudget {
    pub horizon: usize,
    /// Failure probability in `(0, 1)`.
    pub delta: f64,
    /// Reporting multiplier standing in for the unspecified O(.) constant.
    pub constant: f64,
}

impl RegretBudget {
    pub fn new(horizon: usize, delta: f64, constant: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(BwkError::validation(format!("delta must lie in (0, 1), got {delta}")));
        }
        if !constant.is_finite() || constant < 0.0 {
            return Err(BwkError::validation("reporting constant must be non-negative"));
        }
        Ok(Self {
            horizon,
            delta,
            constant,
        })
    }

    /// Width of the Lagrangian payoff range, `1 + 1/rho`.
    pub fn payoff_range(rho: f64) -> f64 {
        1.0 + 1.0 / rho
    }
}

/// Maximizer budget under bandit feedback: `c (1/rho) sqrt(K T ln(T K / delta))`.
pub fn regret_bound_max(budget: &RegretBudget, actions: usize, rho: f64) -> f64 {
    let t = budget.horizon as f64;
    let k = actions as f64;
    budget.constant / rho * (k * t * (t * k / budget.delta).ln()).sqrt()
}

/// Maximizer budget under full information: `c (1/rho) sqrt(T ln(T K / delta))`.
pub fn regret_bound_max_full_info(budget: &RegretBudget, actions: usize, rho: f64) -> f64 {
    let t = budget.horizon as f64;
    let k = actions as f64;
    budget.constant / rho * (t * (t * k / budget.delta).ln()).sqrt()
}

/// Minimizer budget: `c (1/rho) sqrt(T ln(T d / delta))`.
pub fn regret_bound_min(budget: &RegretBudget, resources: usize, rho: f64) -> f64 {
    let t = budget.horizon as f64;
    let d = resources as f64;
    budget.constant / rho * (t * (t * d / budget.delta).ln()).sqrt()
}
