//! End-to-end prediction from fitted models.

use serde::{Deserialize, Serialize};

use crate::cluster::{build_chain, stationary_distribution, ClusterChain, StationaryDistribution};
use crate::config::{AutoscalerConfig, MetricKind, ProfilingTrace};
use crate::error::{invalid, Result};
use crate::metric_model::{fit_metric_model, MetricModel};
use crate::output::{fit_rtf, steady_state_report, ResponseTimeFunction, SteadyStateReport};

/// Both fitted regressions for one workload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub metric_model: MetricModel,
    pub response_time_function: ResponseTimeFunction,
}

impl ModelBundle {
    pub fn fit(trace: &ProfilingTrace, metric_kind: MetricKind) -> Result<Self> {
        Ok(Self {
            metric_model: fit_metric_model(trace, metric_kind)?,
            response_time_function: fit_rtf(trace)?,
        })
    }
}

/// Everything computed for one `(λ, config)` point.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub chain: ClusterChain,
    pub stationary: StationaryDistribution,
    pub report: SteadyStateReport,
}

pub fn predict(bundle: &ModelBundle, cfg: &AutoscalerConfig, lambda: f64) -> Result<Prediction> {
    cfg.validate()?;
    if bundle.metric_model.metric_kind != cfg.metric_kind {
        return Err(invalid(
            "metric_kind",
            alloc::format!(
                "model was fitted on {} but the config scales on {}",
                bundle.metric_model.metric_kind,
                cfg.metric_kind
            ),
        ));
    }
    let chain = build_chain(lambda, &bundle.metric_model, cfg)?;
    let stationary = stationary_distribution(&chain)?;
    let report = steady_state_report(
        &chain,
        &stationary,
        lambda,
        &bundle.metric_model,
        &bundle.response_time_function,
        cfg,
    );
    Ok(Prediction {
        chain,
        stationary,
        report,
    })
}
