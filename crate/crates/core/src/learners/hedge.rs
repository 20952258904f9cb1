use rand::Rng;

use crate::error::{BwkError, Result};

/// Hedge (exponential weights) over `n` experts with full-information losses in `[0, 1]`.
///
/// Weights are stored as logarithms and shifted so the largest is zero after
/// every update; the sampling distribution is invariant to that shift.
#[derive(Debug, Clone, PartialEq)]
pub struct Hedge {
    log_weights: Vec<f64>,
    eta: f64,
}

impl Hedge {
    /// Uniform initial weights.
    pub fn new(n: usize, eta: f64) -> Result<Self> {
        if n == 0 {
            return Err(BwkError::validation("Hedge needs at least one expert"));
        }
        Self::check_eta(eta)?;
        Ok(Self {
            log_weights: vec![0.0; n],
            eta,
        })
    }

    /// Uniform weights with the fixed-horizon rate `sqrt(8 ln n / T)`.
    pub fn tuned(n: usize, horizon: usize) -> Result<Self> {
        Self::new(n, Self::tuned_eta(n, horizon))
    }

    pub fn tuned_eta(n: usize, horizon: usize) -> f64 {
        if n <= 1 {
            return 1.0;
        }
        (8.0 * (n as f64).ln() / horizon.max(1) as f64).sqrt()
    }

    /// Explicit positive initial weights.
    pub fn from_weights(weights: &[f64], eta: f64) -> Result<Self> {
        if weights.is_empty() {
            return Err(BwkError::validation("Hedge needs at least one expert"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(BwkError::validation("Hedge weights must be positive and finite"));
        }
        Self::check_eta(eta)?;
        let mut h = Self {
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            eta,
        };
        h.renormalize();
        Ok(h)
    }

    fn check_eta(eta: f64) -> Result<()> {
        if !eta.is_finite() || eta <= 0.0 {
            return Err(BwkError::validation(format!("learning rate must be positive, got {eta}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Weights scaled so the largest is 1.
    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| l.exp()).collect()
    }

    /// Probabilities proportional to the weights.
    pub fn distribution(&self) -> Vec<f64> {
        softmax(&self.log_weights)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.distribution(), rng)
    }

    /// Multiplicative update `w_j <- w_j * exp(-eta * loss_j)`.
    pub fn update(&mut self, losses: &[f64]) -> Result<()> {
        if losses.len() != self.log_weights.len() {
            return Err(BwkError::validation(format!(
                "expected {} losses, got {}",
                self.log_weights.len(),
                losses.len()
            )));
        }
        if let Some(bad) = losses.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(BwkError::validation(format!(
                "Hedge losses must lie in [0, 1], got {bad}"
            )));
        }
        for (lw, loss) in self.log_weights.iter_mut().zip(losses) {
            *lw -= self.eta * loss;
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

pub(crate) fn softmax(log_weights: &[f64]) -> Vec<f64> {
    let top = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = log_weights.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    p
}

/// Inverse-CDF draw from a probability vector.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding left the cumulative sum just below 1.
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(probs.len() - 1)
}
