use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boosting::BoostConfig;
use crate::error::{Error, Result};
use crate::recovery::{CoreParams, LISTING_RHO};
use crate::sbm::{AdversaryBudget, SbmParams, Strategy};
use crate::sdp::SolverConfig;

/// Adversary applied after sampling.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdversarySpec {
    #[default]
    None,
    /// Budget fractions of m. Without an explicit split, half of `epsilon`
    /// goes to additions and half to removals.
    Outlier {
        epsilon: f64,
        #[serde(default)]
        epsilon1: Option<f64>,
        #[serde(default)]
        epsilon2: Option<f64>,
        #[serde(default = "default_strategy")]
        strategy: Strategy,
    },
    /// Within-cluster additions and between-cluster removals, as fractions
    /// of m. With `clamp`, requests beyond the available pairs are cut down
    /// instead of failing.
    Monotone {
        add_fraction: f64,
        remove_fraction: f64,
        #[serde(default)]
        clamp: bool,
    },
}

fn default_strategy() -> Strategy {
    Strategy::Uniform
}


impl AdversarySpec {
    pub fn outlier(epsilon: f64, strategy: Strategy) -> Self {
        AdversarySpec::Outlier {
            epsilon,
            epsilon1: None,
            epsilon2: None,
            strategy,
        }
    }

    /// The ε fed to the bound evaluators; zero for monotone corruption.
    pub fn epsilon(&self) -> f64 {
        match self {
            AdversarySpec::Outlier { epsilon, .. } => *epsilon,
            _ => 0.0,
        }
    }

    pub fn budget(&self) -> Result<Option<AdversaryBudget>> {
        match *self {
            AdversarySpec::Outlier {
                epsilon,
                epsilon1,
                epsilon2,
                ..
            } => {
                let e1 = epsilon1.unwrap_or(epsilon / 2.0);
                let e2 = epsilon2.unwrap_or(epsilon - e1);
                AdversaryBudget::outlier(epsilon, e1, e2).map(Some)
            }
            _ => Ok(None),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AdversarySpec::None => Ok(()),
            AdversarySpec::Outlier { .. } => self.budget().map(|_| ()),
            AdversarySpec::Monotone {
                add_fraction,
                remove_fraction,
                ..
            } => {
                if [add_fraction, remove_fraction]
                    .iter()
                    .all(|f| f.is_finite() && **f >= 0.0)
                {
                    Ok(())
                } else {
                    Err(Error::InvalidParams("monotone fractions must be nonnegative".into()))
                }
            }
        }
    }
}

/// Either an explicit list or a half-open range `start..end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Range { start: u64, end: u64 },
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::List(v) => v.clone(),
            SeedSpec::Range { start, end } => (*start..*end).collect(),
        }
    }

    /// Parses `A..B` (half-open) or a single integer.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("expected a seed or a range A..B, got `{s}`"));
        match s.split_once("..") {
            Some((a, b)) => {
                let start = a.trim().parse().map_err(|_| bad())?;
                let end = b.trim().parse().map_err(|_| bad())?;
                Ok(SeedSpec::Range { start, end })
            }
            None => Ok(SeedSpec::List(vec![s.trim().parse().map_err(|_| bad())?])),
        }
    }
}

impl Default for SeedSpec {
    fn default() -> Self {
        SeedSpec::List(vec![0])
    }
}

/// One experiment: a model point, its corruption, the solver and rounding
/// settings, an optional boosting round and the seeds to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub params: SbmParams,
    #[serde(default)]
    pub adversary: AdversarySpec,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Present to enable boosting. The SDP then runs on one half of a random
    /// edge split with halved (a, b) and the vote uses the other half.
    #[serde(default)]
    pub boost: Option<BoostConfig>,
    #[serde(default)]
    pub seeds: SeedSpec,
    /// Tail parameter for the per-seed deviation check.
    #[serde(default = "default_residual_s")]
    pub residual_s: f64,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_rho() -> f64 {
    LISTING_RHO
}

fn default_residual_s() -> f64 {
    2.0
}

impl ExperimentConfig {
    pub fn new(params: SbmParams) -> Self {
        ExperimentConfig {
            params,
            adversary: AdversarySpec::None,
            solver: SolverConfig::default(),
            rho: default_rho(),
            boost: None,
            seeds: SeedSpec::default(),
            residual_s: default_residual_s(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.adversary.validate()?;
        self.solver.validate()?;
        CoreParams::new(self.rho)?;
        if let Some(b) = &self.boost {
            b.validate()?;
            if self.params.n < 2 {
                return Err(Error::InvalidParams("boosting needs clusters of size 2 or more".into()));
            }
        }
        if self.seeds.seeds().is_empty() {
            return Err(Error::InvalidParams("at least one seed is required".into()));
        }
        if !(self.residual_s >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "residual_s must be at least 1, got {}",
                self.residual_s
            )));
        }
        Ok(())
    }

    /// SHA-256 of the configuration with seeds and output paths removed,
    /// serialised with sorted keys.
    pub fn config_hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serialises");
        if let Some(map) = v.as_object_mut() {
            map.remove("seeds");
            map.remove("output");
        }
        let canonical = serde_json::to_string(&v).expect("value serialises");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}
