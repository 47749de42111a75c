use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bayes::{PriorSpec, PriorWeights};
use crate::chain_model::{build_family, ChainFamily, FamilySpec, ParamPoint};
use crate::error::{Error, Result};

/// How the true θ of each replication is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaMode {
    /// θ is drawn from the prior (joint Bayesian law).
    Sampled,
    /// Replication `r` uses `list[r % list.len()]` (classical setting).
    Fixed(Vec<ParamPoint>),
}

/// Grid prior over the family box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    pub points_per_axis: usize,
    #[serde(default = "uniform")]
    pub weights: PriorWeights,
}

fn uniform() -> PriorWeights {
    PriorWeights::Uniform
}

/// A JSON experiment description. Unknown fields are rejected.
///
/// ```json
/// {
///   "family": {"family": "two_state", "domain": [[0.05, 0.95], [0.05, 0.95]]},
///   "prior": {"points_per_axis": 21, "weights": "uniform"},
///   "n_schedule": [100, 1000, 10000, 100000],
///   "replications": 50,
///   "master_seed": 20240601,
///   "theta_mode": "sampled",
///   "output": "consistency.csv"
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorConfig>,
    pub n_schedule: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    pub theta_mode: ThetaMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_schedule.is_empty() {
            return Err(Error::Config("n_schedule is empty".into()));
        }
        if self.n_schedule[0] < 1 {
            return Err(Error::Config("n_schedule entries must be >= 1".into()));
        }
        if self.n_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_schedule must be strictly increasing".into()));
        }
        if self.replications < 1 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if let ThetaMode::Fixed(list) = &self.theta_mode {
            if list.is_empty() {
                return Err(Error::Config("theta_mode.fixed is empty".into()));
            }
        }
        if let Some(p) = &self.prior {
            if p.points_per_axis < 1 {
                return Err(Error::Config("prior.points_per_axis must be >= 1".into()));
            }
        }
        Ok(())
    }

    pub fn build_family(&self) -> Result<ChainFamily> {
        build_family(&self.family)
    }

    pub fn build_prior(&self, family: &ChainFamily) -> Result<Option<PriorSpec>> {
        self.prior.as_ref().map(|p| PriorSpec::on_box_grid(family, p.points_per_axis, p.weights)).transpose()
    }

    pub fn max_n(&self) -> usize {
        *self.n_schedule.last().expect("validated non-empty schedule")
    }
}
