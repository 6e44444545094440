//! Pipeline settings and the `key = value` config file.
//!
//! Precedence, highest first: command-line flags, environment, config file,
//! defaults. This module handles the last three; the CLI layers its flags on
//! top.

use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

use crate::audio_io::DEFAULT_SAMPLE_RATE_HZ;
use crate::gender::Band;
use crate::speech::AsrConfig;

/// Overrides the recognition endpoint.
pub const ASR_ENDPOINT_ENV: &str = "GUIDE_ASR_ENDPOINT";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("{key}: invalid value {value:?}")]
    InvalidValue { key: String, value: String },
    #[error("band low edge {low} Hz must be below high edge {high} Hz and non-negative")]
    InvalidBand { low: String, high: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub band: Band,
    pub model_path: Option<PathBuf>,
    pub rules_path: Option<PathBuf>,
    pub asr: AsrConfig,
    /// Expected capture rate; other rates are accepted with a warning.
    pub sample_rate_hz: u32,
    /// Where synthesized speech is written, one WAV per turn.
    pub output_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            band: Band::default(),
            model_path: None,
            rules_path: None,
            asr: AsrConfig::default(),
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            output_dir: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

impl PipelineConfig {
    /// Applies a config file on top of `self`.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut seen = std::collections::BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            self.set(key, value).map_err(|e| match e {
                ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line, key },
                other => other,
            })?;
        }
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "band_low_hz" => self.band.low_hz = parse(key, value)?,
            "band_high_hz" => self.band.high_hz = parse(key, value)?,
            "model_path" => self.model_path = Some(PathBuf::from(value)),
            "rules_path" => self.rules_path = Some(PathBuf::from(value)),
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            "sample_rate_hz" => {
                let rate: u32 = parse(key, value)?;
                if rate == 0 {
                    return Err(ConfigError::InvalidValue {
                        key: key.into(),
                        value: value.into(),
                    });
                }
                self.sample_rate_hz = rate;
            }
            "asr.endpoint" => self.asr.endpoint = value.to_string(),
            "asr.language" => self.asr.language = value.to_string(),
            "asr.retries" => self.asr.retries = parse(key, value)?,
            "asr.retry_delay_ms" => {
                self.asr.retry_delay = Duration::from_millis(parse(key, value)?)
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Applies environment overrides read through `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(endpoint) = lookup(ASR_ENDPOINT_ENV).filter(|v| !v.trim().is_empty()) {
            self.asr.endpoint = endpoint.trim().to_string();
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let Band { low_hz, high_hz } = self.band;
        if !(low_hz.is_finite() && high_hz.is_finite() && low_hz >= 0.0 && low_hz < high_hz) {
            return Err(ConfigError::InvalidBand {
                low: low_hz.to_string(),
                high: high_hz.to_string(),
            });
        }
        Ok(())
    }
}
