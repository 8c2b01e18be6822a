use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::applications::{build_kernel, default_window, KernelSpec};
use crate::bounds::BoundMode;
use crate::integrate::Integrator;
use crate::kernel::UStatKernel;
use crate::point_process::{IntensityModel, Window};
use crate::{Error, Result};

fn default_lambdas() -> Vec<f64> {
    vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0]
}

fn default_replicates() -> usize {
    2000
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub records: Option<PathBuf>,
    #[serde(default)]
    pub ratefit: Option<PathBuf>,
    #[serde(default)]
    pub report: Option<PathBuf>,
}

/// One experiment, read from a single JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    /// Defaults to the kernel's usual window.
    #[serde(default)]
    pub window: Option<Window>,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub c_k: Option<f64>,
    /// Defaults to local for kernels with a locality radius, geometric for
    /// λ-independent kernels, general otherwise.
    #[serde(default)]
    pub bound_mode: Option<BoundMode>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl ExperimentConfig {
    pub fn new(kernel: KernelSpec, lambdas: Vec<f64>, replicates: usize, seed: u64) -> Self {
        ExperimentConfig {
            kernel,
            window: None,
            lambdas,
            replicates,
            integrator: Integrator::default(),
            seed,
            c_k: None,
            bound_mode: None,
            outputs: Outputs::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            return Err(Error::Config("empty lambda grid".into()));
        }
        if self.lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::Config(format!(
                "lambdas must be positive: {:?}",
                self.lambdas
            )));
        }
        if self.lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!(
                "lambda grid must be strictly increasing: {:?}",
                self.lambdas
            )));
        }
        if self.replicates < 2 {
            return Err(Error::Config("need at least 2 replicates".into()));
        }
        self.window()?.validate()?;
        self.kernel()?;
        Ok(())
    }

    pub fn window(&self) -> Result<Window> {
        match &self.window {
            Some(w) => Ok(w.clone()),
            None => default_window(&self.kernel.name),
        }
    }

    pub fn kernel(&self) -> Result<UStatKernel> {
        build_kernel(&self.kernel, &self.window()?)
    }

    pub fn intensity(&self, lambda: f64) -> Result<IntensityModel> {
        IntensityModel::new(lambda, self.window()?)
    }

    pub fn bound_mode(&self, kernel: &UStatKernel) -> BoundMode {
        self.bound_mode.unwrap_or(if kernel.locality().is_some() {
            BoundMode::Local
        } else if kernel.is_geometric() {
            BoundMode::Geometric
        } else {
            BoundMode::General
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let c =
            ExperimentConfig::from_json(r#"{"kernel": {"name": "pairwise-distance"}}"#).unwrap();
        assert_eq!(c.lambdas, default_lambdas());
        assert_eq!(c.replicates, 2000);
        assert_eq!(c.bound_mode(&c.kernel().unwrap()), BoundMode::Geometric);
    }

    #[test]
    fn full_document() {
        let text = r#"{
            "kernel": {"name": "gilbert-count", "delta": 0.05},
            "window": {"spatial": {"box": {"lower": [0, 0], "upper": [1, 1]}}},
            "lambdas": [25, 100],
            "replicates": 500,
            "integrator": {"samples": 1000, "seed": 3},
            "seed": 9,
            "c_k": 2.5,
            "outputs": {"records": "r.csv"}
        }"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.kernel().unwrap().locality(), Some(0.05));
        assert_eq!(c.integrator.inner_samples, 16);
        assert_eq!(c.bound_mode(&c.kernel().unwrap()), BoundMode::Local);
    }

    #[test]
    fn invalid_documents() {
        for text in [
            r#"{"kernel": {"name": "pairwise-distance"}, "lambdas": [4, 2, 8]}"#,
            r#"{"kernel": {"name": "pairwise-distance"}, "lambdas": [0, 2]}"#,
            r#"{"kernel": {"name": "pairwise-distance"}, "replicates": 1}"#,
            r#"{"kernel": {"name": "no-such-kernel"}}"#,
            r#"{"kernel": {"name": "pairwise-distance"}, "typo": 1}"#,
            r#"{"kernel": "#,
        ] {
            assert!(
                matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))),
                "{text}"
            );
        }
    }
}
