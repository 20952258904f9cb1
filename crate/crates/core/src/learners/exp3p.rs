use rand::Rng;

use super::hedge::{sample_index, softmax};
use crate::error::{BwkError, Result};

/// Tuning of [`Exp3P`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp3PParams {
    /// Uniform exploration mass, in `(0, 1]`.
    pub gamma: f64,
    /// Learning rate.
    pub eta: f64,
    /// Optimism added to every gain estimate before importance weighting.
    pub beta: f64,
}

impl Exp3PParams {
    /// `beta = sqrt(ln(K/delta) / (K T))`, `gamma = min(1, 1.05 sqrt(K ln K / T))`,
    /// `eta = gamma / (3K)`.
    pub fn tuned(arms: usize, horizon: usize, delta: f64) -> Self {
        let k = arms.max(1) as f64;
        let t = horizon.max(1) as f64;
        let gamma = if arms <= 1 {
            1.0
        } else {
            (1.05 * (k * k.ln() / t).sqrt()).min(1.0)
        };
        Self {
            gamma,
            eta: gamma / (3.0 * k),
            beta: ((k / delta).ln().max(0.0) / (k * t)).sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(BwkError::validation(format!("gamma must lie in (0, 1], got {}", self.gamma)));
        }
        if !self.eta.is_finite() || self.eta <= 0.0 {
            return Err(BwkError::validation(format!("eta must be positive, got {}", self.eta)));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(BwkError::validation(format!("beta must be non-negative, got {}", self.beta)));
        }
        Ok(())
    }
}

/// EXP3.P for adversarial bandits with rewards in `[0, 1]`.
///
/// Arms are drawn from `p_a = (1 - gamma) w_a / sum(w) + gamma / K`. After
/// each round every arm `j` receives the optimistic importance-weighted gain
/// `(x * 1{j chosen} + beta) / p_j`, applied as `w_j <- w_j exp(eta * gain)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Exp3P {
    log_weights: Vec<f64>,
    params: Exp3PParams,
}

impl Exp3P {
    pub fn new(arms: usize, params: Exp3PParams) -> Result<Self> {
        if arms == 0 {
            return Err(BwkError::validation("EXP3.P needs at least one arm"));
        }
        params.validate()?;
        Ok(Self {
            log_weights: vec![0.0; arms],
            params,
        })
    }

    pub fn from_weights(weights: &[f64], params: Exp3PParams) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(BwkError::validation("EXP3.P weights must be positive and finite"));
        }
        params.validate()?;
        let mut s = Self {
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            params,
        };
        s.renormalize();
        Ok(s)
    }

    pub fn arms(&self) -> usize {
        self.log_weights.len()
    }

    pub fn params(&self) -> &Exp3PParams {
        &self.params
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let k = self.arms() as f64;
        let g = self.params.gamma;
        softmax(&self.log_weights)
            .into_iter()
            .map(|q| (1.0 - g) * q + g / k)
            .collect()
    }

    /// Draws an arm; returns it with the probability it was drawn with.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let p = self.probabilities();
        let arm = sample_index(&p, rng);
        (arm, p[arm])
    }

    /// Feeds back the reward of the arm returned by [`Exp3P::sample`].
    pub fn update(&mut self, arm: usize, reward: f64, probability: f64) -> Result<()> {
        if arm >= self.arms() {
            return Err(BwkError::Range {
                what: "arm",
                value: arm,
                lo: 0,
                hi: self.arms() - 1,
            });
        }
        if !(0.0..=1.0).contains(&reward) {
            return Err(BwkError::validation(format!("EXP3.P reward must lie in [0, 1], got {reward}")));
        }
        if !(probability > 0.0 && probability <= 1.0) {
            return Err(BwkError::validation(format!(
                "sampling probability must lie in (0, 1], got {probability}"
            )));
        }
        let p = self.probabilities();
        let Exp3PParams { eta, beta, .. } = self.params;
        for (j, lw) in self.log_weights.iter_mut().enumerate() {
            let gain = if j == arm {
                (reward + beta) / probability
            } else {
                beta / p[j]
            };
            *lw += eta * gain;
        }
        self.renormalize();
        Ok(())
    }

    fn renormalize(&mut self) {
        let top = self.log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for lw in &mut self.log_weights {
            *lw -= top;
        }
    }
}
