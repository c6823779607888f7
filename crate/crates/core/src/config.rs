//! `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are validated
//! against the set accepted by each subcommand; unknown keys are an error.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(Error::InvalidInput(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::InvalidInput(format!("line {}: duplicate key {k}", lineno + 1)));
            }
        }
        Ok(Config { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for k in self.entries.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::InvalidInput(format!("unknown configuration key '{k}'")));
            }
        }
        Ok(())
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidInput(format!("{key}: '{v}' is not a finite number"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("{key}: '{v}' is not a non-negative integer"))),
        }
    }

    /// Comma-separated list of numbers.
    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.entries.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("{key}: '{x}' is not a number")))
                })
                .collect(),
        }
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let c = Config::parse("# comment\n p = 3\n\nalpha_mode=cos\n").unwrap();
        assert_eq!(c.f64_or("p", 2.0).unwrap(), 3.0);
        assert_eq!(c.get_str("alpha_mode"), Some("cos"));
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let c = Config::parse("p = 3\nbogus = 1\n").unwrap();
        assert!(c.check_keys(&["p"]).is_err());
        assert!(Config::parse("p = 3\np = 4\n").is_err());
        assert!(Config::parse("just words\n").is_err());
    }

    #[test]
    fn parses_lists() {
        let c = Config::parse("eps_list = 0.2, 0.1,0.05").unwrap();
        assert_eq!(c.list_or("eps_list", &[]).unwrap(), vec![0.2, 0.1, 0.05]);
    }
}
