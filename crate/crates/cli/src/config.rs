//! Configuration handling: flat `key = value` files merged with
//! command-line overrides.
//!
//! Recognized keys: `D`, `v`, `l`, `k`, `n`, `alpha`, `mu`, `alpha_max`,
//! `nx`, `dt`, `t_final`. Flags always win over file values; file values
//! win over the baseline defaults. Blank lines and `#` comments are
//! ignored; unknown keys are errors.

use std::path::Path;

use reactor_core::model::{InitialDataSpec, ReactorParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: expected `key = value`, got `{text}`")]
    Parse {
        path: String,
        line: usize,
        text: String,
    },
    #[error("{path}:{line}: unknown key `{key}`")]
    UnknownKey {
        path: String,
        line: usize,
        key: String,
    },
    #[error("{path}:{line}: invalid value for `{key}`: {value}")]
    BadValue {
        path: String,
        line: usize,
        key: String,
        value: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] reactor_core::Error),
}

/// One fully merged run configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub d: f64,
    pub v: f64,
    pub l: f64,
    pub k: f64,
    pub n: f64,
    /// Gain used by single-α subcommands when no flag is given.
    pub alpha: f64,
    pub mu: f64,
    pub alpha_max: f64,
    pub nx: usize,
    pub dt: f64,
    pub t_final: f64,
}

impl Default for RunConfig {
    /// Baseline experiment: k = 0.001, v = 0.01, l = 1, D = 0.0025, n = 2,
    /// μ = 0.9, α_max = 0.95, N = 201 nodes, dt = 0.05 s over 2000 s.
    fn default() -> Self {
        Self {
            d: 0.0025,
            v: 0.01,
            l: 1.0,
            k: 0.001,
            n: 2.0,
            alpha: 0.0,
            mu: 0.9,
            alpha_max: 0.95,
            nx: 201,
            dt: 0.05,
            t_final: 2000.0,
        }
    }
}

/// Optional per-key overrides collected from command-line flags.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub nx: Option<usize>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
}

impl RunConfig {
    pub fn params(&self) -> Result<ReactorParams, ConfigError> {
        Ok(ReactorParams::new(self.d, self.v, self.l, self.k, self.n)?)
    }

    pub fn initial_data_spec(&self) -> Result<InitialDataSpec, ConfigError> {
        Ok(InitialDataSpec::new(self.mu, self.alpha_max)?)
    }

    pub fn apply_overrides(&mut self, overrides: &Overrides) {
        if let Some(alpha) = overrides.alpha {
            self.alpha = alpha;
        }
        if let Some(nx) = overrides.nx {
            self.nx = nx;
        }
        if let Some(dt) = overrides.dt {
            self.dt = dt;
        }
        if let Some(t_final) = overrides.t_final {
            self.t_final = t_final;
        }
    }
}

/// Loads the configuration: baseline defaults, then the file at `path`
/// (when given), then `overrides`, later layers winning.
pub fn load_config(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::default();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        apply_file(&mut config, &text, &path.display().to_string())?;
    }
    config.apply_overrides(overrides);
    Ok(config)
}

/// Parses `text` as `key = value` lines into `config`.
pub fn apply_file(config: &mut RunConfig, text: &str, path: &str) -> Result<(), ConfigError> {
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(ConfigError::Parse {
                path: path.to_string(),
                line,
                text: trimmed.to_string(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let bad_value = || ConfigError::BadValue {
            path: path.to_string(),
            line,
            key: key.to_string(),
            value: value.to_string(),
        };
        let parse_f64 = || value.parse::<f64>().map_err(|_| bad_value());
        match key {
            "D" => config.d = parse_f64()?,
            "v" => config.v = parse_f64()?,
            "l" => config.l = parse_f64()?,
            "k" => config.k = parse_f64()?,
            "n" => config.n = parse_f64()?,
            "alpha" => config.alpha = parse_f64()?,
            "mu" => config.mu = parse_f64()?,
            "alpha_max" => config.alpha_max = parse_f64()?,
            "nx" => config.nx = value.parse::<usize>().map_err(|_| bad_value())?,
            "dt" => config.dt = parse_f64()?,
            "t_final" => config.t_final = parse_f64()?,
            other => {
                return Err(ConfigError::UnknownKey {
                    path: path.to_string(),
                    line,
                    key: other.to_string(),
                })
            }
        }
    }
    Ok(())
}
