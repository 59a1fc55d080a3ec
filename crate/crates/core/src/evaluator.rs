//! Evaluator model: probabilities of the replica count ordered by the scale
//! evaluator, `N_ord = clamp(⌈OV / TV⌉, 1, N_max)`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::positive;
use crate::error::{invalid, Result};
use crate::metric_model::GaussianDist;

/// `probs[k] = Pr{N_ord = k + 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderDistribution {
    pub probs: Vec<f64>,
}

impl OrderDistribution {
    pub fn n_max(&self) -> usize {
        self.probs.len()
    }

    pub fn mean_order(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| (k + 1) as f64 * p).sum()
    }

    /// `Pr{N_ord ≤ k + 1}` for each `k`.
    pub fn cumulative(&self) -> Vec<f64> {
        self.probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }
}

/// Probability of each ordered replica count given the observed-value
/// distribution.
///
/// Mass at or below one target value (including the negative tail) goes to a
/// single replica, mass above `(N_max - 1)·TV` to `N_max`.
pub fn order_probabilities(dist: &GaussianDist, tv: f64, n_max: usize) -> Result<OrderDistribution> {
    positive("target_value", tv)?;
    if n_max < 1 {
        return Err(invalid("n_max", "must be at least 1"));
    }
    let mut probs = Vec::with_capacity(n_max);
    if n_max == 1 {
        probs.push(1.0);
        return Ok(OrderDistribution { probs });
    }
    probs.push(dist.cdf(tv));
    for k in 1..n_max - 1 {
        let lo = k as f64 * tv;
        let hi = lo + tv;
        // Difference the tail on the side of the mean where it is small.
        let p = if lo >= dist.mean {
            dist.sf(lo) - dist.sf(hi)
        } else {
            dist.cdf(hi) - dist.cdf(lo)
        };
        probs.push(p.max(0.0));
    }
    probs.push(dist.sf((n_max - 1) as f64 * tv));
    Ok(OrderDistribution { probs })
}
