//! Serving configuration: a flat key = value file, overridden by
//! `READMIT_*` environment variables, overridden in turn by whatever the
//! process sets programmatically (the CLI maps its flags on top).

use std::fs;
use std::path::{Path, PathBuf};

use readmit_core::{Error, Result};

/// Default decision threshold: the cost-weighted operating point published
/// with the model, not the 0.5 convention.
pub const DEFAULT_THRESHOLD: f64 = 0.2285;
pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_EXPLAIN_K: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ServeConfig {
    pub model_path: PathBuf,
    pub imputation_path: PathBuf,
    /// Optional drift reference; without it the service scores but does not
    /// monitor drift.
    pub drift_reference_path: Option<PathBuf>,
    pub threshold: f64,
    pub port: u16,
    /// Contributions listed per explanation.
    pub explain_k: usize,
    /// Overrides the reference's rolling-window capacity when set.
    pub window_size: Option<usize>,
}

impl ServeConfig {
    pub fn new(model_path: impl Into<PathBuf>, imputation_path: impl Into<PathBuf>) -> ServeConfig {
        ServeConfig {
            model_path: model_path.into(),
            imputation_path: imputation_path.into(),
            drift_reference_path: None,
            threshold: DEFAULT_THRESHOLD,
            port: DEFAULT_PORT,
            explain_k: DEFAULT_EXPLAIN_K,
            window_size: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<ServeConfig> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Parses `key = value` lines; `#` starts a comment, blank lines are
    /// skipped, unknown keys are errors.
    pub fn parse(text: &str) -> Result<ServeConfig> {
        let mut model_path: Option<PathBuf> = None;
        let mut imputation_path: Option<PathBuf> = None;
        let mut config = ServeConfig::new("", "");
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::invalid_config(format!(
                    "config line {}: expected key = value, got {raw:?}",
                    number + 1
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "model_path" => model_path = Some(PathBuf::from(value)),
                "imputation_path" => imputation_path = Some(PathBuf::from(value)),
                "drift_reference_path" => {
                    config.drift_reference_path = Some(PathBuf::from(value));
                }
                "threshold" => config.threshold = parse_number(key, value)?,
                "port" => config.port = parse_number(key, value)?,
                "explain_k" => config.explain_k = parse_number(key, value)?,
                "window_size" => config.window_size = Some(parse_number(key, value)?),
                other => {
                    return Err(Error::invalid_config(format!("unknown config key '{other}'")));
                }
            }
        }
        config.model_path = model_path
            .ok_or_else(|| Error::invalid_config("config is missing required key 'model_path'"))?;
        config.imputation_path = imputation_path.ok_or_else(|| {
            Error::invalid_config("config is missing required key 'imputation_path'")
        })?;
        Ok(config)
    }

    /// Applies `READMIT_*` overrides from the process environment.
    pub fn apply_env(&mut self) -> Result<()> {
        self.apply_env_pairs(std::env::vars())
    }

    /// The testable core of [`apply_env`]: unknown `READMIT_` keys are
    /// errors so a typoed override cannot be ignored silently.
    pub fn apply_env_pairs(
        &mut self,
        vars: impl IntoIterator<Item = (String, String)>,
    ) -> Result<()> {
        for (key, value) in vars {
            let Some(name) = key.strip_prefix("READMIT_") else { continue };
            match name {
                "MODEL_PATH" => self.model_path = PathBuf::from(value),
                "IMPUTATION_PATH" => self.imputation_path = PathBuf::from(value),
                "DRIFT_REFERENCE_PATH" => {
                    self.drift_reference_path = Some(PathBuf::from(value));
                }
                "THRESHOLD" => self.threshold = parse_number(&key, &value)?,
                "PORT" => self.port = parse_number(&key, &value)?,
                "EXPLAIN_K" => self.explain_k = parse_number(&key, &value)?,
                "WINDOW_SIZE" => self.window_size = Some(parse_number(&key, &value)?),
                _ => {
                    return Err(Error::invalid_config(format!(
                        "unknown environment override '{key}'"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.model_path.as_os_str().is_empty() {
            return Err(Error::invalid_config("model_path must not be empty"));
        }
        if self.imputation_path.as_os_str().is_empty() {
            return Err(Error::invalid_config("imputation_path must not be empty"));
        }
        if !(self.threshold.is_finite() && self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::invalid_config(format!(
                "threshold must be in (0, 1), got {}",
                self.threshold
            )));
        }
        if self.explain_k == 0 {
            return Err(Error::invalid_config("explain_k must be >= 1"));
        }
        if self.window_size == Some(0) {
            return Err(Error::invalid_config("window_size must be >= 1"));
        }
        Ok(())
    }
}

fn parse_number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::invalid_config(format!("config key '{key}': cannot parse {value:?}: {e}")))
}
