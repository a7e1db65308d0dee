//! Run configuration: a JSON file, overridden by command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use svarma_core::densities::ShockDensity;
use svarma_core::estimate::OptimSchedule;
use svarma_core::model::{Normalization, SvarmaSpec};
use svarma_core::whf::NormalizationMode;

use crate::error::{CliError, Result};

pub const JOBS_ENV: &str = "SVARMA_WHF_JOBS";

/// Integer structure and shock families of the model to fit or simulate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    #[serde(default)]
    pub kappa: usize,
    #[serde(default)]
    pub k: usize,
    #[serde(default = "natural")]
    pub normalization: Normalization,
    pub densities: Vec<ShockDensity>,
}

fn natural() -> Normalization {
    Normalization::Natural
}

impl ModelConfig {
    pub fn spec(&self) -> Result<SvarmaSpec> {
        if self.densities.len() != self.n {
            return Err(CliError::InvalidConfig(format!(
                "model.densities has {} entries, n = {}",
                self.densities.len(),
                self.n
            )));
        }
        Ok(SvarmaSpec::new(self.n, self.p, self.q, self.kappa, self.k, self.normalization, self.densities.clone())?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub t: usize,
    pub burn_in: usize,
    /// Free parameter vector of the true model; the reference point when absent.
    pub theta: Option<Vec<f64>>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { t: 500, burn_in: 200, theta: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectConfig {
    pub p_max: usize,
    pub q_max: usize,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig { p_max: 2, q_max: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WhfConfig {
    /// `canonical`, `natural` or `b0_identity`.
    pub normalization: NormalizationMode,
}

impl Default for WhfConfig {
    fn default() -> Self {
        WhfConfig { normalization: NormalizationMode::Canonical }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RotateConfig {
    pub shock: usize,
    pub variable: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Input file of the command: observations, coefficients, an estimate or residuals.
    pub data: Option<String>,
    pub out: String,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub horizon: usize,
    /// Subtract column means before fitting.
    pub demean: bool,
    pub model: Option<ModelConfig>,
    pub schedule: OptimSchedule,
    pub simulate: SimulateConfig,
    pub select: SelectConfig,
    pub whf: WhfConfig,
    pub rotate: RotateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data: None,
            out: ".".into(),
            seed: None,
            jobs: None,
            horizon: 20,
            demean: true,
            model: None,
            schedule: OptimSchedule::default(),
            simulate: SimulateConfig::default(),
            select: SelectConfig::default(),
            whf: WhfConfig::default(),
            rotate: RotateConfig::default(),
        }
    }
}

/// Values given on the command line; each one wins over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub data: Option<String>,
    pub out: Option<String>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub horizon: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::ConfigNotFound(path.display().to_string()),
            _ => CliError::io(path, e),
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::InvalidConfig(e.to_string()))
    }

    /// Apply flags, then the environment fallback for the worker count.
    pub fn resolve(mut self, o: &Overrides, env_jobs: Option<&str>) -> Result<Self> {
        if o.data.is_some() {
            self.data = o.data.clone();
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        self.seed = o.seed.or(self.seed);
        self.horizon = o.horizon.unwrap_or(self.horizon);
        self.jobs = match (o.jobs, env_jobs) {
            (Some(j), _) => Some(j),
            (None, Some(s)) => Some(
                s.trim()
                    .parse()
                    .map_err(|_| CliError::InvalidConfig(format!("{JOBS_ENV}={s:?} is not a worker count")))?,
            ),
            (None, None) => self.jobs,
        };
        if self.jobs == Some(0) {
            return Err(CliError::InvalidConfig("jobs must be at least 1".into()));
        }
        self.schedule.check()?;
        Ok(self)
    }

    pub fn data_path(&self) -> Result<&str> {
        self.data.as_deref().ok_or(CliError::Missing("input file (--data or \"data\" in the config)"))
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or(CliError::Missing("seed (--seed or \"seed\" in the config)"))
    }

    pub fn model(&self) -> Result<&ModelConfig> {
        self.model.as_ref().ok_or(CliError::Missing("model block in the config"))
    }

    pub fn worker_count(&self) -> usize {
        self.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_environment_beats_file() {
        let base = RunConfig { jobs: Some(3), seed: Some(1), ..RunConfig::default() };
        let r = base.clone().resolve(&Overrides::default(), None).unwrap();
        assert_eq!(r.jobs, Some(3));
        let r = base.clone().resolve(&Overrides::default(), Some("5")).unwrap();
        assert_eq!(r.jobs, Some(5));
        let o = Overrides { jobs: Some(2), seed: Some(9), ..Overrides::default() };
        let r = base.clone().resolve(&o, Some("5")).unwrap();
        assert_eq!((r.jobs, r.seed), (Some(2), Some(9)));
        assert!(base.resolve(&Overrides::default(), Some("many")).is_err());
    }

    #[test]
    fn empty_file_gives_defaults() {
        let c: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        assert!(serde_json::from_str::<RunConfig>(r#"{"sede": 1}"#).is_err());
    }
}
