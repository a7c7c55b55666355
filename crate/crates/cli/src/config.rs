//! Optional `key = value` run-configuration files. Command-line flags win
//! over file values, which win over the built-in defaults.

use std::path::Path;

use sugartax_core::numeric::{parse_rational, Rational};
use sugartax_core::welfare::WelfareMode;

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    pub welfare_mode: Option<WelfareMode>,
    pub precision: Option<u32>,
    pub grid_step: Option<Rational>,
    pub alpha_step: Option<Rational>,
    pub samples: Option<usize>,
    pub oracle: Option<bool>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    BadLine { line: usize },
    #[error("line {line}: {message}")]
    BadValue { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
}

pub fn load_config(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<FileConfig, ConfigError> {
    let mut config = FileConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or(ConfigError::BadLine { line })?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |message: String| ConfigError::BadValue { line, message };
        match key {
            "welfare_mode" => {
                config.welfare_mode = Some(value.parse::<WelfareMode>().map_err(bad)?)
            }
            "precision" => {
                config.precision = Some(value.parse::<u32>().map_err(|e| bad(e.to_string()))?)
            }
            "grid_step" => {
                config.grid_step = Some(parse_rational(value).map_err(|e| bad(e.to_string()))?)
            }
            "alpha_step" => {
                config.alpha_step = Some(parse_rational(value).map_err(|e| bad(e.to_string()))?)
            }
            "samples" => {
                config.samples = Some(value.parse::<usize>().map_err(|e| bad(e.to_string()))?)
            }
            "oracle" => {
                config.oracle = Some(match value {
                    "true" => true,
                    "false" => false,
                    other => return Err(bad(format!("expected true or false, got `{other}`"))),
                })
            }
            other => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: other.into(),
                })
            }
        }
    }
    Ok(config)
}
