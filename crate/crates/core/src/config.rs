//! Platform configuration and the profiling-trace data model.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Metric the autoscaler scales on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    /// Concurrency: requests in flight per container.
    Cc,
    /// Requests per second arriving at each container.
    Rps,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Cc => "cc",
            MetricKind::Rps => "rps",
        })
    }
}

impl core::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cc" | "concurrency" => Ok(MetricKind::Cc),
            "rps" => Ok(MetricKind::Rps),
            other => Err(invalid("metric_kind", format!("unknown metric `{other}`"))),
        }
    }
}

pub const DEFAULT_T_EVA_S: f64 = 2.0;
pub const DEFAULT_STABLE_WINDOW_S: f64 = 60.0;
pub const DEFAULT_MU_PRO: f64 = 1.0;
pub const DEFAULT_MU_DEP: f64 = 2.0;

/// Autoscaler knobs shared by the analytical model and the simulator.
///
/// Rates are in 1/s and durations in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoscalerConfig {
    pub metric_kind: MetricKind,
    /// Target value per container: requests for CC, requests/s for RPS.
    pub target_value: f64,
    /// Maximum replica count. The replica range is `[1, n_max]`.
    pub n_max: usize,
    /// Period of the scale evaluator.
    #[serde(default = "default_t_eva")]
    pub t_eva_s: f64,
    /// Length of the moving-average window over per-second samples.
    #[serde(default = "default_stable_window")]
    pub stable_window_s: f64,
    /// Provisioning rate of a single container.
    #[serde(default = "default_mu_pro")]
    pub mu_pro: f64,
    /// Deprovisioning rate of a single container.
    #[serde(default = "default_mu_dep")]
    pub mu_dep: f64,
}

fn default_t_eva() -> f64 {
    DEFAULT_T_EVA_S
}
fn default_stable_window() -> f64 {
    DEFAULT_STABLE_WINDOW_S
}
fn default_mu_pro() -> f64 {
    DEFAULT_MU_PRO
}
fn default_mu_dep() -> f64 {
    DEFAULT_MU_DEP
}

impl AutoscalerConfig {
    /// Configuration with the platform defaults for every knob except the
    /// metric, target value and replica cap.
    pub fn new(metric_kind: MetricKind, target_value: f64, n_max: usize) -> Self {
        Self {
            metric_kind,
            target_value,
            n_max,
            t_eva_s: DEFAULT_T_EVA_S,
            stable_window_s: DEFAULT_STABLE_WINDOW_S,
            mu_pro: DEFAULT_MU_PRO,
            mu_dep: DEFAULT_MU_DEP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("target_value", self.target_value)?;
        if self.n_max < 1 {
            return Err(invalid("n_max", "must be at least 1"));
        }
        positive("t_eva_s", self.t_eva_s)?;
        if !(self.stable_window_s >= 1.0) || !self.stable_window_s.is_finite() {
            return Err(invalid(
                "stable_window_s",
                format!("must be at least 1 s, got {}", self.stable_window_s),
            ));
        }
        positive("mu_pro", self.mu_pro)?;
        positive("mu_dep", self.mu_dep)?;
        Ok(())
    }

    /// Number of per-second samples kept by the observation window.
    pub fn window_len(&self) -> usize {
        libm::ceil(self.stable_window_s) as usize
    }
}

pub(crate) fn positive(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {value}")))
    }
}

/// Mean Poisson arrival rate to the whole service, validated.
pub fn check_arrival_rate(lambda: f64) -> Result<()> {
    positive("lambda", lambda)
}

/// One profiling measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Arrival rate per ready container, `λ/N`, in req/s.
    pub per_container_rate: f64,
    /// Window-averaged observed metric (concurrency or RPS).
    pub observed_metric: f64,
    /// Mean response time in seconds.
    pub mean_response_time_s: f64,
}

impl TraceRow {
    pub fn new(per_container_rate: f64, observed_metric: f64, mean_response_time_s: f64) -> Self {
        Self {
            per_container_rate,
            observed_metric,
            mean_response_time_s,
        }
    }

    /// Checks the row invariants, returning a human-readable reason on failure.
    pub fn check(&self) -> core::result::Result<(), &'static str> {
        if !(self.per_container_rate >= 0.0) || !self.per_container_rate.is_finite() {
            return Err("per_container_rate must be a finite non-negative number");
        }
        if !(self.observed_metric >= 0.0) || !self.observed_metric.is_finite() {
            return Err("observed_metric must be a finite non-negative number");
        }
        if !self.mean_response_time_s.is_finite() || self.mean_response_time_s < 0.0 {
            return Err("mean_response_time_s must be a finite non-negative number");
        }
        if self.per_container_rate > 0.0 && self.mean_response_time_s <= 0.0 {
            return Err("mean_response_time_s must be positive when per_container_rate > 0");
        }
        Ok(())
    }
}

/// Ordered list of profiling measurements keyed by per-container rate.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfilingTrace {
    pub rows: Vec<TraceRow>,
}

/// Recommended minimum number of rows for an acceptable fit.
pub const RECOMMENDED_MIN_ROWS: usize = 100;

impl ProfilingTrace {
    /// Builds a trace, rejecting rows that violate the row invariants.
    pub fn new(rows: Vec<TraceRow>) -> Result<Self> {
        for (idx, row) in rows.iter().enumerate() {
            row.check().map_err(|reason| Error::InvalidTraceRow {
                row: idx,
                reason: reason.into(),
            })?;
        }
        Ok(Self { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn distinct_rates(&self) -> usize {
        let mut rates: Vec<f64> = self.rows.iter().map(|r| r.per_container_rate).collect();
        rates.sort_by(f64::total_cmp);
        rates.dedup();
        rates.len()
    }

    pub fn max_rate(&self) -> f64 {
        self.rows.iter().map(|r| r.per_container_rate).fold(0.0, f64::max)
    }

    /// Errors unless the trace has at least `min` distinct per-container rates.
    pub fn require_distinct_rates(&self, min: usize) -> Result<()> {
        let distinct = self.distinct_rates();
        if distinct < min {
            return Err(Error::InsufficientData(format!(
                "{distinct} distinct per-container rates in {} rows, need at least {min}",
                self.rows.len()
            )));
        }
        Ok(())
    }

    pub fn extend(&mut self, other: &ProfilingTrace) {
        self.rows.extend_from_slice(&other.rows);
    }
}
