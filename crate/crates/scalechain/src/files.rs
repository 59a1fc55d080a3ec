//! JSON documents read and written by the CLI.
//!
//! Every document the tool writes carries `schema_version`. Input documents
//! reject unknown keys.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use scalechain_core::{AutoscalerConfig, MetricKind, MetricModel, ModelBundle, ResponseTimeFunction};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable document");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(value)).map_err(|e| Error::io(path, e))
}

/// Reads and validates an autoscaler configuration.
pub fn read_config(path: impl AsRef<Path>) -> Result<AutoscalerConfig> {
    let cfg: AutoscalerConfig = read_json(&path)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Fitted models as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub metric_model: MetricModel,
    pub response_time_function: ResponseTimeFunction,
}

impl ModelFile {
    pub fn new(bundle: ModelBundle) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            metric_model: bundle.metric_model,
            response_time_function: bundle.response_time_function,
        }
    }

    pub fn bundle(&self) -> ModelBundle {
        ModelBundle {
            metric_model: self.metric_model.clone(),
            response_time_function: self.response_time_function.clone(),
        }
    }
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ModelBundle> {
    let file: ModelFile = read_json(&path)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(Error::Invalid(format!(
            "{}: unsupported schema_version {}",
            path.as_ref().display(),
            file.schema_version
        )));
    }
    Ok(file.bundle())
}

/// Grid of arrival rates and target values over a fixed configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub lambdas: Vec<f64>,
    pub target_values: Vec<f64>,
    pub metric_kind: MetricKind,
    pub n_max: usize,
    #[serde(default)]
    pub t_eva_s: Option<f64>,
    #[serde(default)]
    pub stable_window_s: Option<f64>,
    #[serde(default)]
    pub mu_pro: Option<f64>,
    #[serde(default)]
    pub mu_dep: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() || self.target_values.is_empty() {
            return Err(Error::Invalid(
                "sweep needs at least one lambda and one target value".into(),
            ));
        }
        if let Some(bad) = self.lambdas.iter().chain(&self.target_values).find(|v| !(**v > 0.0)) {
            return Err(Error::Invalid(format!("sweep values must be positive, got {bad}")));
        }
        self.config(self.target_values[0]).validate()?;
        Ok(())
    }

    /// Configuration for one target value.
    pub fn config(&self, target_value: f64) -> AutoscalerConfig {
        let mut cfg = AutoscalerConfig::new(self.metric_kind, target_value, self.n_max);
        if let Some(v) = self.t_eva_s {
            cfg.t_eva_s = v;
        }
        if let Some(v) = self.stable_window_s {
            cfg.stable_window_s = v;
        }
        if let Some(v) = self.mu_pro {
            cfg.mu_pro = v;
        }
        if let Some(v) = self.mu_dep {
            cfg.mu_dep = v;
        }
        cfg
    }

    /// `(λ, TV)` points in row-major order: all target values for the first λ, then the next.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.lambdas
            .iter()
            .flat_map(|&l| self.target_values.iter().map(move |&tv| (l, tv)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        let text = r#"{"metric_kind":"cc","target_value":5,"n_max":10,"t_eva":2}"#;
        let err = serde_json::from_str::<AutoscalerConfig>(text).unwrap_err();
        assert!(err.to_string().contains("unknown field `t_eva`"));
    }

    #[test]
    fn config_defaults_fill_in() {
        let cfg: AutoscalerConfig =
            serde_json::from_str(r#"{"metric_kind":"rps","target_value":5,"n_max":10}"#).unwrap();
        assert_eq!(cfg, AutoscalerConfig::new(MetricKind::Rps, 5.0, 10));
        let full = r#"{"metric_kind":"cc","target_value":5,"n_max":10,"t_eva_s":2,"stable_window_s":60,"mu_pro":1,"mu_dep":2}"#;
        assert_eq!(
            serde_json::from_str::<AutoscalerConfig>(full).unwrap().metric_kind,
            MetricKind::Cc
        );
    }

    #[test]
    fn sweep_points_are_cartesian() {
        let spec = SweepSpec {
            lambdas: vec![5.0, 20.0, 50.0],
            target_values: vec![1.0, 2.0, 5.0, 10.0],
            metric_kind: MetricKind::Cc,
            n_max: 10,
            t_eva_s: None,
            stable_window_s: None,
            mu_pro: Some(1.5),
            mu_dep: None,
        };
        spec.validate().unwrap();
        let pts = spec.points();
        assert_eq!(pts.len(), 12);
        assert_eq!(pts[1], (5.0, 2.0));
        assert_eq!(spec.config(2.0).mu_pro, 1.5);
        let empty = SweepSpec {
            lambdas: vec![],
            ..spec
        };
        assert!(empty.validate().is_err());
    }
}
