//! Experiment drivers shared by the CLI and the acceptance tests: prediction
//! documents, parameter sweeps, multi-seed simulation and model/simulator
//! comparison.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use scalechain_core::cluster::{build_rate_matrix, RateMatrix};
use scalechain_core::{
    predict, simulate, AutoscalerConfig, MetricKind, ModelBundle, OrderDistribution, ProfilingTrace, SimulationConfig,
    SimulationReport, SteadyStateReport, WorkloadModel,
};

use crate::error::{Error, Result};
use crate::files::{SweepSpec, SCHEMA_VERSION};

/// The three headline metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub avg_replica_count: f64,
    pub avg_concurrency: f64,
    pub avg_response_time_s: f64,
}

impl Metrics {
    pub fn from_report(r: &SteadyStateReport) -> Self {
        Self {
            avg_replica_count: r.avg_replica_count,
            avg_concurrency: r.avg_concurrency,
            avg_response_time_s: r.avg_response_time_s,
        }
    }

    pub fn from_simulation(r: &SimulationReport) -> Self {
        Self {
            avg_replica_count: r.avg_replica_count,
            avg_concurrency: r.avg_concurrency,
            avg_response_time_s: r.avg_response_time_s,
        }
    }

    fn zip(self, other: Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            avg_replica_count: f(self.avg_replica_count, other.avg_replica_count),
            avg_concurrency: f(self.avg_concurrency, other.avg_concurrency),
            avg_response_time_s: f(self.avg_response_time_s, other.avg_response_time_s),
        }
    }

    pub fn max(&self) -> f64 {
        self.avg_replica_count
            .max(self.avg_concurrency)
            .max(self.avg_response_time_s)
    }
}

/// Matrices behind a prediction, for inspection.
#[derive(Debug, Clone, Serialize)]
pub struct Explain {
    /// `transition_matrix[s][s']` with `s = (i - 1)·N_max + (j - 1)`.
    pub transition_matrix: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
    /// Provisioning generator for each order `i`.
    pub rate_matrices: Vec<RateMatrix>,
    /// Order distribution for each ready count `j`.
    pub order_distributions: Vec<OrderDistribution>,
    /// Vertical factor `V_i` for each order `i`.
    pub ready_transitions: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictDocument {
    pub schema_version: u32,
    pub config: AutoscalerConfig,
    pub report: SteadyStateReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub explain: Option<Explain>,
}

pub fn predict_document(
    bundle: &ModelBundle,
    cfg: &AutoscalerConfig,
    lambda: f64,
    explain: bool,
    request_window_s: Option<f64>,
) -> Result<PredictDocument> {
    let prediction = predict(bundle, cfg, lambda)?;
    let explain = if explain {
        let rate_matrices = (1..=cfg.n_max)
            .map(|i| build_rate_matrix(i, cfg))
            .collect::<scalechain_core::Result<Vec<_>>>()?;
        Some(Explain {
            transition_matrix: prediction.chain.p.to_rows(),
            pi: prediction.stationary.pi.clone(),
            rate_matrices,
            order_distributions: prediction.chain.horizontal.clone(),
            ready_transitions: prediction.chain.vertical.iter().map(|v| v.to_rows()).collect(),
        })
    } else {
        None
    };
    let report = match request_window_s {
        Some(w) => prediction.report.with_request_window(w),
        None => prediction.report,
    };
    Ok(PredictDocument {
        schema_version: SCHEMA_VERSION,
        config: *cfg,
        report,
        explain,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub target_value: f64,
    pub outcome: std::result::Result<Metrics, String>,
}

/// Predicts every `(λ, TV)` point of the spec. Points run in parallel; rows
/// come back in spec order.
pub fn run_sweep(bundle: &ModelBundle, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    Ok(spec
        .points()
        .into_par_iter()
        .map(|(lambda, tv)| SweepRow {
            lambda,
            target_value: tv,
            outcome: predict(bundle, &spec.config(tv), lambda)
                .map(|p| Metrics::from_report(&p.report))
                .map_err(|e| e.to_string()),
        })
        .collect())
}

pub const SWEEP_HEADER: &str = "lambda,target_value,avg_replicas,avg_concurrency,avg_rt_s";

/// Writes sweep rows. An `error` column is added only when some point failed.
pub fn write_sweep_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let with_errors = rows.iter().any(|r| r.outcome.is_err());
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header: Vec<&str> = SWEEP_HEADER.split(',').collect();
    if with_errors {
        header.push("error");
    }
    let to_csv = |e: csv::Error| Error::Invalid(format!("{}: {e}", path.display()));
    w.write_record(&header).map_err(to_csv)?;
    for row in rows {
        let mut rec = vec![row.lambda.to_string(), row.target_value.to_string()];
        match &row.outcome {
            Ok(m) => {
                rec.push(m.avg_replica_count.to_string());
                rec.push(m.avg_concurrency.to_string());
                rec.push(m.avg_response_time_s.to_string());
                if with_errors {
                    rec.push(String::new());
                }
            }
            Err(msg) => {
                rec.extend([String::new(), String::new(), String::new(), msg.clone()]);
            }
        }
        w.write_record(&rec).map_err(to_csv)?;
    }
    let mut inner = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    inner.flush().map_err(|e| Error::io(path, e))
}

/// Sample mean with a Student-t 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_dev: f64,
    /// Absent for a single run.
    pub ci95_half_width: Option<f64>,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Self {
                mean,
                std_dev: 0.0,
                ci95_half_width: None,
            };
        }
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        let std_dev = var.sqrt();
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        Self {
            mean,
            std_dev,
            ci95_half_width: Some(t * std_dev / (n as f64).sqrt()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub runs: usize,
    pub avg_replica_count: Estimate,
    pub avg_concurrency: Estimate,
    pub avg_response_time_s: Estimate,
}

impl SimulationSummary {
    pub fn from_runs(runs: &[SimulationReport]) -> Self {
        let pick = |f: fn(&SimulationReport) -> f64| Estimate::from_samples(&runs.iter().map(f).collect::<Vec<_>>());
        Self {
            runs: runs.len(),
            avg_replica_count: pick(|r| r.avg_replica_count),
            avg_concurrency: pick(|r| r.avg_concurrency),
            avg_response_time_s: pick(|r| r.avg_response_time_s),
        }
    }

    pub fn means(&self) -> Metrics {
        Metrics {
            avg_replica_count: self.avg_replica_count.mean,
            avg_concurrency: self.avg_concurrency.mean,
            avg_response_time_s: self.avg_response_time_s.mean,
        }
    }
}

/// Runs seeds `cfg.seed, cfg.seed + 1, …` in parallel; reports are in seed order.
pub fn simulate_seeds(cfg: &SimulationConfig, seeds: usize) -> Result<Vec<SimulationReport>> {
    cfg.validate()?;
    if seeds == 0 {
        return Err(Error::Invalid("--seeds must be at least 1".into()));
    }
    (0..seeds as u64)
        .into_par_iter()
        .map(|k| {
            let mut c = *cfg;
            c.seed = cfg.seed.wrapping_add(k);
            simulate(&c).map_err(Error::from)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateDocument {
    pub schema_version: u32,
    pub config: SimulationConfig,
    pub summary: SimulationSummary,
    pub runs: Vec<SimulationReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub schema_version: u32,
    pub lambda: f64,
    pub config: AutoscalerConfig,
    pub analytical: Metrics,
    pub simulated: SimulationSummary,
    /// `|analytical − simulated| / |simulated|` per metric.
    pub relative_error: Metrics,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

/// Predicts and simulates the same configuration and compares the means.
///
/// `model_cfg`, when given, must equal the simulator's autoscaler config.
pub fn compare(
    bundle: &ModelBundle,
    model_cfg: Option<&AutoscalerConfig>,
    sim_cfg: &SimulationConfig,
    seeds: usize,
    tolerance: f64,
) -> Result<Comparison> {
    if let Some(cfg) = model_cfg {
        if cfg != &sim_cfg.autoscaler {
            return Err(Error::ConfigMismatch(format!(
                "model config {cfg:?} differs from simulation config {:?}",
                sim_cfg.autoscaler
            )));
        }
    }
    if !(tolerance >= 0.0) {
        return Err(Error::Invalid(format!(
            "tolerance must be non-negative, got {tolerance}"
        )));
    }
    let analytical = Metrics::from_report(&predict(bundle, &sim_cfg.autoscaler, sim_cfg.lambda)?.report);
    let simulated = SimulationSummary::from_runs(&simulate_seeds(sim_cfg, seeds)?);
    let relative_error = analytical.zip(simulated.means(), |a, s| (a - s).abs() / s.abs());
    Ok(Comparison {
        schema_version: SCHEMA_VERSION,
        lambda: sim_cfg.lambda,
        config: sim_cfg.autoscaler,
        analytical,
        simulated,
        within_tolerance: relative_error.max() <= tolerance,
        relative_error,
        tolerance,
    })
}

/// Profiling trace from single-replica runs at each arrival rate, so every
/// row's per-container rate equals the run's `λ`.
pub fn profile_single_replica(
    workload: WorkloadModel,
    metric_kind: MetricKind,
    lambdas: &[f64],
    duration_s: f64,
    warmup_s: f64,
    seed: u64,
) -> Result<ProfilingTrace> {
    let traces = lambdas
        .par_iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let autoscaler = AutoscalerConfig::new(metric_kind, f64::MAX, 1);
            let mut c = SimulationConfig::new(autoscaler, workload, lambda, duration_s);
            c.warmup_s = warmup_s;
            c.seed = seed.wrapping_add(k as u64);
            simulate(&c).map(|r| r.profiling_trace().0)
        })
        .collect::<scalechain_core::Result<Vec<_>>>()?;
    let mut out = ProfilingTrace::default();
    for t in &traces {
        out.extend(t);
    }
    Ok(out)
}
