//! TOML run configurations.
//!
//! ```toml
//! seed = 7
//! horizon = 16384
//! replicates = 20
//!
//! [graph]
//! kind = "disjoint_cliques"
//! sizes = [4, 4, 4, 4]
//!
//! [contexts]
//! num_contexts = 8
//!
//! [env]
//! kind = "stochastic_gap"
//! gap = 0.2
//!
//! [algo]
//! kind = "unknown"
//! params = "auto"
//! tuned_scale = 0.02
//! ```
//!
//! Unknown keys are rejected and every error names the offending key.

use std::path::Path;

use crate::harness::RunConfig;
use crate::{Error, Result};

/// Parses and validates a configuration.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Config {
        path: "<document>".into(),
        message: e.message().to_string(),
    })?;
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Config {
            path: if path == "." { "<root>".into() } else { path },
            message: e.into_inner().message().trim().to_string(),
        }
    })?;
    // Building the graph and the parameter schedule catches the remaining
    // semantic errors (self-loops, horizon versus epoch length, ...).
    config.resolve()?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn to_toml(config: &RunConfig) -> Result<String> {
    toml::to_string(config).map_err(|e| Error::Config {
        path: "<document>".into(),
        message: e.to_string(),
    })
}
