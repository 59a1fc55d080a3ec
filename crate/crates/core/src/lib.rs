//! Steady-state performance and cost prediction for metric-based autoscaling
//! serverless deployments (Knative / Cloud Run semantics).
//!
//! The analytical pipeline has four stages:
//!
//! 1. [`metric_model`] maps the per-container arrival rate `λ/N` to a Gaussian
//!    distribution of the observed autoscaling metric.
//! 2. [`evaluator`] turns that distribution into probabilities over the
//!    replica count ordered by the scale evaluator.
//! 3. [`cluster`] combines evaluator decisions with a provisioning CTMC into a
//!    two-dimensional DTMC over (ordered, ready) replica counts and solves for
//!    its limiting distribution.
//! 4. [`output`] reduces the limiting distribution to average response time,
//!    average replica count and average per-container concurrency.
//!
//! [`simulator`] is a discrete-event model of the same autoscaler, used to
//! generate profiling traces and to validate the analytical predictions.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![forbid(unsafe_code)]
#![warn(rust_2018_idioms, missing_debug_implementations)]
// `!(x > 0.0)` style checks are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cluster;
pub mod config;
pub mod error;
pub mod evaluator;
pub mod linalg;
pub mod metric_model;
pub mod normal;
pub mod output;
pub mod pipeline;
pub mod regression;
pub mod simulator;

pub use cluster::{ClusterChain, RateMatrix, StationaryDistribution};
pub use config::{AutoscalerConfig, MetricKind, ProfilingTrace, TraceRow};
pub use error::{Error, Result};
pub use evaluator::OrderDistribution;
pub use metric_model::{GaussianDist, MetricModel};
pub use output::{ResponseTimeFunction, SteadyStateReport};
pub use pipeline::{predict, ModelBundle, Prediction};
pub use simulator::{simulate, SimulationConfig, SimulationReport, WorkloadModel};
