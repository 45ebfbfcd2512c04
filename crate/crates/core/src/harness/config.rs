use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::adversaries::{DraccGenParams, MdbgGenParams, OjsGenParams};
use crate::dracc::PolicyFamilySpec;
use crate::error::{Error, Result};
use crate::experts::MbpKind;
use crate::meta::OracleChoice;

/// Where trial instances come from. Generator horizons are overridden by the
/// experiment's horizon list; file instances run at their own horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum InstanceSource {
    Dracc { params: DraccGenParams },
    /// `params.jobs` is set to the horizon.
    Ojs { params: OjsGenParams },
    /// `params.right` is set to the horizon.
    Mdbg { params: MdbgGenParams },
    DraccFile { path: PathBuf },
    OjsFile { path: PathBuf },
    MdbgFile { path: PathBuf },
    ExplicitFile { path: PathBuf },
}

impl InstanceSource {
    pub fn is_pricing(&self) -> bool {
        !matches!(self, InstanceSource::ExplicitFile { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsOracle {
    Kdemand,
    General,
    Ojs,
    /// Plays the target policy at the learner's own state.
    Follower,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerSpec {
    Lbpp {
        #[serde(default)]
        oracle: OracleChoice,
    },
    /// Chase-and-switch with an explicit oracle; `sigma` defaults to the oracle's bound.
    Cs {
        oracle: CsOracle,
        #[serde(default)]
        sigma: Option<f64>,
    },
    /// Fixed-period bandit learner with the scheduling oracle.
    Flp {
        #[serde(default)]
        tau: Option<usize>,
        #[serde(default)]
        mbp: MbpKind,
    },
    FixedPolicy {
        policy: String,
    },
    /// Expert learner over policies without chasing.
    OlscOnly,
}

/// Policy families for explicit instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TableFamily {
    Constant,
    AllStationary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoliciesSpec {
    Pricing(PolicyFamilySpec),
    Table(TableFamily),
}

fn default_seeds() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub instance: InstanceSource,
    pub learner: LearnerSpec,
    /// Benchmark set; pricing files may carry their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policies: Option<PoliciesSpec>,
    #[serde(default)]
    pub horizons: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Also write one per-round CSV per trial.
    #[serde(default)]
    pub per_round: bool,
    /// Fill `wall_ms`; off by default so outputs are reproducible.
    #[serde(default)]
    pub record_wall_time: bool,
}

impl ExperimentConfig {
    /// Parse and validate; `origin` labels diagnostics.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|e| Error::Config { path: origin.to_string(), line: 0, column: 0, message: e.to_string() })?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_json(&text, &path.display().to_string())?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    /// Make relative instance paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        match &mut self.instance {
            InstanceSource::DraccFile { path }
            | InstanceSource::OjsFile { path }
            | InstanceSource::MdbgFile { path }
            | InstanceSource::ExplicitFile { path } => {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
            _ => {}
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds == 0 {
            return Err(Error::InvalidParams("seeds must be at least 1".into()));
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParams("horizons must be strictly increasing".into()));
        }
        if self.horizons.contains(&0) {
            return Err(Error::InvalidParams("horizons must be positive".into()));
        }
        let generated = matches!(
            self.instance,
            InstanceSource::Dracc { .. } | InstanceSource::Ojs { .. } | InstanceSource::Mdbg { .. }
        );
        if generated && self.horizons.is_empty() {
            return Err(Error::InvalidParams("generated instances need a horizon list".into()));
        }
        match (&self.policies, self.instance.is_pricing()) {
            (Some(PoliciesSpec::Table(_)), true) => {
                return Err(Error::InvalidParams("pricing instances need a pricing policy family".into()))
            }
            (Some(PoliciesSpec::Pricing(_)), false) => {
                return Err(Error::InvalidParams("explicit instances use constant or all_stationary policies".into()))
            }
            _ => {}
        }
        if !self.instance.is_pricing() && matches!(self.learner, LearnerSpec::Lbpp { .. } | LearnerSpec::Flp { .. }) {
            return Err(Error::InvalidParams("this learner needs a pricing instance".into()));
        }
        if let LearnerSpec::Cs { oracle, sigma } = &self.learner {
            if !self.instance.is_pricing() && *oracle != CsOracle::Follower {
                return Err(Error::InvalidParams("explicit instances only support the follower oracle".into()));
            }
            if sigma.is_some_and(|s| !(s >= 0.0)) {
                return Err(Error::InvalidParams("sigma must be nonnegative".into()));
            }
        }
        Ok(())
    }
}
