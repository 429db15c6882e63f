//! Flat `key = value` defaults file shared by every subcommand.
//!
//! Precedence is strict: an explicit command-line flag always wins, then a
//! file entry, then the built-in default. Keys a given subcommand does not
//! consult are simply ignored, so one file can configure a whole pipeline.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use readmit_core::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    pub fn empty() -> FileConfig {
        FileConfig(BTreeMap::new())
    }

    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else {
            return Ok(FileConfig::empty());
        };
        let text = fs::read_to_string(path)?;
        let mut map = BTreeMap::new();
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
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig(map))
    }

    /// Typed lookup; `None` when the key is absent.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(value) => value.parse().map(Some).map_err(|e| {
                Error::invalid_config(format!("config key '{key}': cannot parse {value:?}: {e}"))
            }),
        }
    }

    pub fn get_path(&self, key: &str) -> Option<PathBuf> {
        self.0.get(key).map(PathBuf::from)
    }
}

/// flag > file > default.
pub fn resolve<T: FromStr>(flag: Option<T>, file: &FileConfig, key: &str, default: T) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(v),
        None => Ok(file.get(key)?.unwrap_or(default)),
    }
}
