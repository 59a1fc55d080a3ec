//! Output model: reduces the limiting distribution to average response time,
//! average replica count and average per-container concurrency.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterChain, StationaryDistribution};
use crate::config::{AutoscalerConfig, ProfilingTrace};
use crate::error::{Error, Result};
use crate::metric_model::MetricModel;
use crate::regression;

/// `RTF(ρ) = α₀ + α₁ρ + α₂ρ²`, mean response time in seconds at per-container
/// rate `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseTimeFunction {
    pub coeffs: [f64; 3],
    pub fit_mse: f64,
    pub fit_r2: f64,
    pub rho_max: f64,
}

impl ResponseTimeFunction {
    pub fn eval(&self, rho: f64) -> f64 {
        let [a0, a1, a2] = self.coeffs;
        a0 + a1 * rho + a2 * rho * rho
    }

    pub fn is_extrapolated(&self, rho: f64) -> bool {
        rho > self.rho_max * (1.0 + 1e-9)
    }
}

/// Least-squares fit of mean response time on `[1, ρ, ρ²]`.
///
/// Rows with zero per-container rate carry no response-time information and
/// are skipped.
pub fn fit_rtf(trace: &ProfilingTrace) -> Result<ResponseTimeFunction> {
    let rows: Vec<_> = trace.rows.iter().filter(|r| r.per_container_rate > 0.0).collect();
    let active = ProfilingTrace {
        rows: rows.iter().map(|r| **r).collect(),
    };
    active.require_distinct_rates(3)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.per_container_rate).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.mean_response_time_s).collect();
    let fit = regression::fit_powers(&xs, &ys, &[0, 1, 2])?;
    let rtf = ResponseTimeFunction {
        coeffs: [fit.coeffs[0], fit.coeffs[1], fit.coeffs[2]],
        fit_mse: fit.mse,
        fit_r2: fit.r2,
        rho_max: active.max_rate(),
    };
    if !(rtf.coeffs[0] > 0.0) {
        return Err(Error::FitRejected {
            reason: "non-positive response time at zero load",
            rho: 0.0,
        });
    }
    let [_, a1, a2] = rtf.coeffs;
    let mut candidates = alloc::vec![rtf.rho_max];
    if a2 != 0.0 {
        let vertex = -a1 / (2.0 * a2);
        if vertex > 0.0 && vertex < rtf.rho_max {
            candidates.push(vertex);
        }
    }
    for rho in candidates {
        if rtf.eval(rho) < 0.0 {
            return Err(Error::FitRejected {
                reason: "negative fitted response time inside the profiled range",
                rho,
            });
        }
    }
    Ok(rtf)
}

/// Contribution of one chain state to the averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRow {
    /// Ordered replica count.
    pub i: usize,
    /// Ready replica count.
    pub j: usize,
    pub pi: f64,
    /// Expected positive part of the observed metric at `λ/j`.
    pub concurrency: f64,
    pub response_time_s: f64,
    /// `λ/j` lies beyond the profiled range of either fitted function.
    pub extrapolated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDiagnostics {
    pub stationary_residual: f64,
    pub transient_states: usize,
    /// Stationary mass on states whose `λ/j` is extrapolated.
    pub extrapolated_mass: f64,
    pub metric_fit_r2: f64,
    pub rt_fit_r2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateReport {
    pub lambda: f64,
    pub target_value: f64,
    pub avg_response_time_s: f64,
    pub avg_replica_count: f64,
    pub avg_concurrency: f64,
    /// Expected requests `λ·T` over the requested billing window, if any.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub requests_in_window: Option<f64>,
    pub marginal_ready: Vec<f64>,
    pub marginal_ordered: Vec<f64>,
    pub per_state: Vec<StateRow>,
    pub diagnostics: ReportDiagnostics,
}

/// Averages over the limiting distribution. In each state the replica count is
/// the ready count `j`.
pub fn steady_state_report(
    chain: &ClusterChain,
    pi: &StationaryDistribution,
    lambda: f64,
    mm: &MetricModel,
    rtf: &ResponseTimeFunction,
    cfg: &AutoscalerConfig,
) -> SteadyStateReport {
    let n = chain.n_max;
    // Per ready count; independent of the order.
    let per_ready: Vec<(f64, f64, bool)> = (1..=n)
        .map(|j| {
            let rho = lambda / j as f64;
            let c = mm.observed_value_distribution(rho).mean_of_positive_part();
            (c, rtf.eval(rho), mm.is_extrapolated(rho) || rtf.is_extrapolated(rho))
        })
        .collect();

    let mut avg_rt = 0.0;
    let mut avg_n = 0.0;
    let mut avg_c = 0.0;
    let mut extrapolated_mass = 0.0;
    let mut per_state = Vec::with_capacity(n * n);
    for (s, &p) in pi.pi.iter().enumerate() {
        let (i, j) = chain.state(s);
        let (c, rt, extrapolated) = per_ready[j - 1];
        avg_rt += p * rt;
        avg_n += p * j as f64;
        avg_c += p * c;
        if extrapolated {
            extrapolated_mass += p;
        }
        per_state.push(StateRow {
            i,
            j,
            pi: p,
            concurrency: c,
            response_time_s: rt,
            extrapolated,
        });
    }

    SteadyStateReport {
        lambda,
        target_value: cfg.target_value,
        avg_response_time_s: avg_rt,
        avg_replica_count: avg_n,
        avg_concurrency: avg_c,
        requests_in_window: None,
        marginal_ready: pi.marginal_ready.clone(),
        marginal_ordered: pi.marginal_ordered.clone(),
        per_state,
        diagnostics: ReportDiagnostics {
            stationary_residual: pi.residual,
            transient_states: pi.transient_states,
            extrapolated_mass,
            metric_fit_r2: mm.fit_r2,
            rt_fit_r2: rtf.fit_r2,
        },
    }
}

impl SteadyStateReport {
    /// Records the expected request count `λ·T` for a billing window of
    /// `window_s` seconds.
    pub fn with_request_window(mut self, window_s: f64) -> Self {
        self.requests_in_window = Some(self.lambda * window_s);
        self
    }
}
