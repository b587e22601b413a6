//! TOML run configuration with `[model]`, `[env]` and `[sweep]` tables.
//!
//! Every table and field is optional; missing values take their defaults and
//! unknown keys are rejected. Precedence, highest first: command-line flags,
//! the `HIERARCHY_ABM_SEED` environment variable (seed only), the file, the
//! built-in defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::ModelParams;
use crate::env::EnvParams;
use crate::error::ConfigError;
use crate::harness::SweepSpec;

pub const SEED_ENV_VAR: &str = "HIERARCHY_ABM_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub env: EnvParams,
    pub sweep: SweepSpec,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_owned(),
            message: e.message().to_owned(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// Replaces the base seed with the value of `HIERARCHY_ABM_SEED`, if given.
    pub fn apply_seed_var(&mut self, value: Option<&str>) -> Result<(), ConfigError> {
        if let Some(v) = value {
            self.sweep.base_seed = v
                .trim()
                .parse()
                .map_err(|e| ConfigError::invalid(SEED_ENV_VAR, format!("`{v}` is not a u64 seed: {e}")))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model.validate()?;
        self.env.validate()?;
        self.sweep.validate()
    }
}
