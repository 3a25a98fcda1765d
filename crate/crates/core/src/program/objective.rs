use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-link utility `g`.
///
/// `Power { beta }` is `g(s) = s^(1-beta) / (1-beta)`; with `beta = alpha` the
/// objective is the weighted alpha-fair allocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Utility {
    Log,
    Power { beta: f64 },
    Linear,
}

impl Utility {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Utility::Power { beta } if !(beta > 0.0) || beta == 1.0 || !beta.is_finite() => {
                Err(Error::InvalidObjective(format!(
                    "power utility needs beta > 0, beta != 1 (got {beta})"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, Utility::Linear)
    }

    pub fn value(&self, s: f64) -> f64 {
        match *self {
            Utility::Log => s.ln(),
            Utility::Power { beta } => {
                if s <= 0.0 {
                    if beta > 1.0 {
                        f64::NEG_INFINITY
                    } else {
                        0.0
                    }
                } else {
                    s.powf(1.0 - beta) / (1.0 - beta)
                }
            }
            Utility::Linear => s,
        }
    }

    pub fn deriv(&self, s: f64) -> f64 {
        match *self {
            Utility::Log => 1.0 / s,
            Utility::Power { beta } => s.powf(-beta),
            Utility::Linear => 1.0,
        }
    }

    pub fn second(&self, s: f64) -> f64 {
        match *self {
            Utility::Log => -1.0 / (s * s),
            Utility::Power { beta } => -beta * s.powf(-beta - 1.0),
            Utility::Linear => 0.0,
        }
    }
}

/// The (alpha, g) objective `sum_j g(s_j) q_j^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub alpha: f64,
    pub utility: Utility,
}

impl Objective {
    pub fn new(alpha: f64, utility: Utility) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidObjective(format!(
                "alpha must be positive (got {alpha})"
            )));
        }
        utility.validate()?;
        Ok(Objective { alpha, utility })
    }

    /// Proportional fairness: `alpha = 1`, `g = log`.
    pub fn proportional() -> Self {
        Objective {
            alpha: 1.0,
            utility: Utility::Log,
        }
    }

    /// `q_j^alpha`, with nonpositive queues mapped to weight zero.
    pub fn queue_weights(&self, q: &[f64]) -> Vec<f64> {
        q.iter()
            .map(|&x| if x > 0.0 { x.powf(self.alpha) } else { 0.0 })
            .collect()
    }

    /// Objective value; zero-weight coordinates contribute nothing.
    pub fn value(&self, s: &[f64], q: &[f64]) -> f64 {
        weighted_value(self.utility, &self.queue_weights(q), s)
    }
}

/// `sum_j c_j g(s_j)` over coordinates with `c_j > 0`.
pub fn weighted_value(utility: Utility, weights: &[f64], s: &[f64]) -> f64 {
    weights
        .iter()
        .zip(s)
        .filter(|(c, _)| **c > 0.0)
        .map(|(&c, &x)| c * utility.value(x))
        .sum()
}
