use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Parse `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", n + 1)))?;
        let key = k.trim().to_string();
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key {key}", n + 1)));
        }
    }
    Ok(map)
}

pub fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Suite parameters resolved from the command line first and the config file second.
pub struct Params<'a> {
    config: &'a BTreeMap<String, String>,
    asked: RefCell<BTreeSet<String>>,
}

impl<'a> Params<'a> {
    pub fn new(config: &'a BTreeMap<String, String>) -> Self {
        Self { config, asked: RefCell::new(BTreeSet::new()) }
    }

    pub fn get<T: FromStr>(&self, key: &str, cli: Option<T>) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.asked.borrow_mut().insert(key.to_string());
        if cli.is_some() {
            return Ok(cli);
        }
        match self.config.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| CliError::Usage(format!("config {key}={v}: {e}"))),
        }
    }

    pub fn or<T: FromStr>(&self, key: &str, cli: Option<T>, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key, cli)?.unwrap_or(default))
    }

    pub fn required<T: FromStr>(&self, key: &str, cli: Option<T>) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key, cli)?.ok_or_else(|| CliError::Usage(format!("missing --{key}")))
    }

    pub fn flag(&self, key: &str, cli: bool) -> Result<bool, CliError> {
        Ok(cli || self.get::<bool>(key, None)?.unwrap_or(false))
    }

    /// Reject config keys that the command never asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        let asked = self.asked.borrow();
        match self.config.keys().find(|k| !asked.contains(*k)) {
            Some(k) => Err(CliError::Usage(format!(
                "config key {k} does not apply here; expected one of {}",
                asked.iter().cloned().collect::<Vec<_>>().join(", ")
            ))),
            None => Ok(()),
        }
    }
}
