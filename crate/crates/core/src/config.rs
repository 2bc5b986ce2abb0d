//! Experiment configuration document (TOML).
//!
//! ```toml
//! schema_version = 1
//! seeds = [0, 1, 2]
//!
//! [plan]
//! initial_iters = 2000
//! num_boot_phases = 3
//! t_per_phase = 2000
//! policy = "rucb"
//!
//! [plan.policy_config]
//! beta = 2.0
//! a = 3.0
//! variant = "dynamic"   # or { fixed_alpha = 1.0 } / { fixed_k = 50 }
//! ohem_pool = 8
//!
//! [scripted]            # or [segmentation]
//! size = 500
//! corruption_rate = 0.05
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scheduler::{PhasePlan, Policy};
use crate::testbed::{ScriptedCorpusSpec, SegmentationSpec};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("invalid config: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Error>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default = "default_plan")]
    pub plan: PhasePlan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scripted: Option<ScriptedCorpusSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segmentation: Option<SegmentationSpec>,
}

fn schema_version() -> u32 {
    CONFIG_SCHEMA_VERSION
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_plan() -> PhasePlan {
    PhasePlan::desk_scale(Policy::Rucb)
}
/// Which synthetic corpus a config describes.
#[derive(Debug, Clone, PartialEq)]
pub enum CorpusConfig<'a> {
    Scripted(&'a ScriptedCorpusSpec),
    Segmentation(&'a SegmentationSpec),
}

impl ExperimentConfig {
    pub fn corpus(&self) -> Option<CorpusConfig<'_>> {
        match (&self.scripted, &self.segmentation) {
            (Some(s), None) => Some(CorpusConfig::Scripted(s)),
            (None, Some(s)) => Some(CorpusConfig::Segmentation(s)),
            _ => None,
        }
    }

    pub fn corpus_size(&self) -> Option<usize> {
        match self.corpus()? {
            CorpusConfig::Scripted(s) => Some(s.size),
            CorpusConfig::Segmentation(s) => Some(s.size),
        }
    }

    /// Every field-level violation, keys given as dotted paths.
    pub fn check(&self) -> Vec<Error> {
        let mut errors = Vec::new();
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            errors.push(Error::field(
                "schema_version",
                format!(
                    "unsupported version {} (expected {CONFIG_SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        if self.seeds.is_empty() {
            errors.push(Error::field("seeds", "must list at least one seed"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            errors.push(Error::field("seeds", "seeds must be distinct"));
        }
        match self.corpus() {
            None => errors.push(Error::field(
                "scripted",
                "exactly one of [scripted] or [segmentation] must be present",
            )),
            Some(CorpusConfig::Scripted(s)) => errors.extend(prefixed("scripted", s.check())),
            Some(CorpusConfig::Segmentation(s)) => {
                errors.extend(prefixed("segmentation", s.check()))
            }
        }
        let size = self.corpus_size().unwrap_or(usize::MAX).max(1);
        let plan = self.plan;
        let mut plan_errors = Vec::new();
        for e in plan.check(size) {
            match e {
                Error::InvalidField { field, message } if field != "t_per_phase" => plan_errors
                    .push(Error::InvalidField {
                        field: format!("policy_config.{field}"),
                        message,
                    }),
                other => plan_errors.push(other),
            }
        }
        errors.extend(prefixed("plan", plan_errors));
        errors
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }
}

fn prefixed(section: &str, errs: Vec<Error>) -> impl Iterator<Item = Error> + '_ {
    errs.into_iter().map(move |e| match e {
        Error::InvalidField { field, message } => Error::InvalidField {
            field: format!("{section}.{field}"),
            message,
        },
        other => other,
    })
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig =
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    let errors = config.check();
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Invalid(errors))
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}
