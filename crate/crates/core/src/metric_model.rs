//! Metric model: per-container arrival rate to a Gaussian distribution of the
//! window-averaged observed metric.
//!
//! The mean follows `α₁ρ + α₂ρ²` (forced through the origin, since no traffic
//! means no concurrency) and the standard deviation follows `β₀ + β₁ρ`,
//! floored at [`STD_FLOOR`].

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::{MetricKind, ProfilingTrace};
use crate::error::{Error, Result};
use crate::normal;
use crate::regression;

/// Lower bound on the fitted standard deviation.
pub const STD_FLOOR: f64 = 1e-6;

/// Minimum number of bins for the heteroscedastic std fit.
const MIN_STD_BINS: usize = 5;
const MAX_STD_BINS: usize = 50;
const ROWS_PER_STD_BIN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianDist {
    pub mean: f64,
    pub std: f64,
}

impl GaussianDist {
    pub fn new(mean: f64, std: f64) -> Self {
        Self {
            mean,
            std: std.max(STD_FLOOR),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        normal::cdf((x - self.mean) / self.std)
    }

    /// `1 - cdf(x)` without cancellation in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        normal::sf((x - self.mean) / self.std)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        normal::pdf((x - self.mean) / self.std) / self.std
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.mean * c, self.std * c)
    }

    /// Partial expectation `E[max(X, 0)] = ∫₀^∞ x f(x) dx`.
    ///
    /// Closed form `μΦ(μ/σ) + σφ(μ/σ)`, evaluated as `μ + E[max(-X, 0)]` for
    /// non-negative means so the result never drops below `μ`.
    pub fn mean_of_positive_part(&self) -> f64 {
        let (mu, sigma) = (self.mean, self.std);
        let z = mu / sigma;
        if mu >= 0.0 {
            let negative_part = sigma * (normal::pdf(z) - z * normal::sf(z));
            mu + negative_part.max(0.0)
        } else {
            (sigma * (normal::pdf(z) + z * normal::cdf(z))).max(0.0)
        }
    }
}

/// Fitted map from per-container arrival rate to the observed-value density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricModel {
    pub metric_kind: MetricKind,
    /// `(α₁, α₂)` in `mean(ρ) = α₁ρ + α₂ρ²`.
    pub mean_coeffs: [f64; 2],
    /// `(β₀, β₁)` in `std(ρ) = max(β₀ + β₁ρ, STD_FLOOR)`.
    pub std_coeffs: [f64; 2],
    pub fit_mse: f64,
    pub fit_r2: f64,
    /// Largest per-container rate seen during fitting.
    pub rho_max: f64,
}

impl MetricModel {
    pub fn mean(&self, rho: f64) -> f64 {
        let [a1, a2] = self.mean_coeffs;
        a1 * rho + a2 * rho * rho
    }

    pub fn std(&self, rho: f64) -> f64 {
        let [b0, b1] = self.std_coeffs;
        (b0 + b1 * rho).max(STD_FLOOR)
    }

    /// Observed-value distribution at per-container rate `rho = λ/N`.
    pub fn observed_value_distribution(&self, rho: f64) -> GaussianDist {
        debug_assert!(rho >= 0.0, "negative per-container rate {rho}");
        GaussianDist::new(self.mean(rho), self.std(rho))
    }

    /// True when `rho` lies beyond the fitted range.
    pub fn is_extrapolated(&self, rho: f64) -> bool {
        rho > self.rho_max * (1.0 + 1e-9)
    }
}

/// Fits the metric model to a profiling trace.
pub fn fit_metric_model(trace: &ProfilingTrace, metric_kind: MetricKind) -> Result<MetricModel> {
    trace.require_distinct_rates(2)?;
    let rhos: Vec<f64> = trace.rows.iter().map(|r| r.per_container_rate).collect();
    let obs: Vec<f64> = trace.rows.iter().map(|r| r.observed_metric).collect();
    let rho_max = trace.max_rate();

    let fit = regression::fit_powers(&rhos, &obs, &[1, 2])?;
    let mean_coeffs = [fit.coeffs[0], fit.coeffs[1]];
    check_nonnegative_mean(mean_coeffs, rho_max, &obs)?;

    let mean = |rho: f64| mean_coeffs[0] * rho + mean_coeffs[1] * rho * rho;
    let mut residuals: Vec<(f64, f64)> = rhos.iter().zip(&obs).map(|(&r, &y)| (r, y - mean(r))).collect();
    residuals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let std_coeffs = fit_std(&residuals);

    Ok(MetricModel {
        metric_kind,
        mean_coeffs,
        std_coeffs,
        fit_mse: fit.mse,
        fit_r2: fit.r2,
        rho_max,
    })
}

fn check_nonnegative_mean([a1, a2]: [f64; 2], rho_max: f64, obs: &[f64]) -> Result<()> {
    let scale = obs.iter().fold(1.0f64, |m, y| m.max(y.abs()));
    let tol = 1e-9 * scale;
    let mean = |rho: f64| a1 * rho + a2 * rho * rho;
    let mut candidates = alloc::vec![rho_max];
    if a2 != 0.0 {
        let vertex = -a1 / (2.0 * a2);
        if vertex > 0.0 && vertex < rho_max {
            candidates.push(vertex);
        }
    }
    for rho in candidates {
        if mean(rho) < -tol {
            return Err(Error::FitRejected {
                reason: "negative fitted mean inside the profiled range",
                rho,
            });
        }
    }
    Ok(())
}

/// Fits `β₀ + β₁ρ` to per-bin sample standard deviations of the mean-fit
/// residuals. `residuals` holds `(ρ, residual)` sorted by `ρ`.
fn fit_std(residuals: &[(f64, f64)]) -> [f64; 2] {
    let n = residuals.len();
    if n >= 2 * MIN_STD_BINS {
        let bins = (n / ROWS_PER_STD_BIN).clamp(MIN_STD_BINS, MAX_STD_BINS);
        let mut centers = Vec::with_capacity(bins);
        let mut stds = Vec::with_capacity(bins);
        for b in 0..bins {
            let chunk = &residuals[b * n / bins..(b + 1) * n / bins];
            let m = chunk.len() as f64;
            let center = chunk.iter().map(|p| p.0).sum::<f64>() / m;
            let mean_res = chunk.iter().map(|p| p.1).sum::<f64>() / m;
            let var = chunk.iter().map(|p| (p.1 - mean_res) * (p.1 - mean_res)).sum::<f64>() / (m - 1.0);
            centers.push(center);
            stds.push(libm::sqrt(var));
        }
        if let Ok(fit) = regression::fit_powers(&centers, &stds, &[0, 1]) {
            return [fit.coeffs[0], fit.coeffs[1]];
        }
    }
    let dof = n.saturating_sub(2).max(1) as f64;
    let pooled = libm::sqrt(residuals.iter().map(|p| p.1 * p.1).sum::<f64>() / dof);
    [pooled, 0.0]
}
