//! Flat `key = value` run configuration.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' any*
//! entry   := key ws* '=' ws* value
//! key     := [a-z0-9_-]+        (underscores are read as hyphens)
//! ```
//!
//! Values run to the end of the line and are trimmed. A key may appear once.
//! Keys are the long CLI flag names (`n`, `alpha`, `eps`, `k-critical`,
//! `replicas`, `seed`, `out`, `threads`, `statistics`, `joint-nodes`,
//! `pgf-grid`, `weight-policy`, `sampler`, `block-size`, `k-grid`, `n-grid`),
//! and a flag given on the command line replaces the file's value.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err =
                |msg: String| Error::Parse(format!("config line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key = value, got {line:?}")))?;
            let key = normalize(key);
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
                return Err(parse_err(format!("bad key {key:?}")));
            }
            if entries
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(parse_err(format!("duplicate key {key:?}")));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets `key`, replacing any value from the file.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(normalize(key), value.into());
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.entries.remove(&normalize(key))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize(key)).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Parse(format!("config key {key}: {v:?}: {e}")))
            })
            .transpose()
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<T>()
                            .map_err(|e| Error::Parse(format!("config key {key}: {s:?}: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// Comma-separated `a:b` pairs, e.g. `0.5:0.5, 0.9:0.2`.
    pub fn pairs<T: FromStr>(&self, key: &str) -> Result<Option<Vec<(T, T)>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(items) = self.list::<String>(key)? else {
            return Ok(None);
        };
        items
            .iter()
            .map(|item| {
                let (a, b) = item.split_once(':').ok_or_else(|| {
                    Error::Parse(format!("config key {key}: expected a:b, got {item:?}"))
                })?;
                let p = |s: &str| {
                    s.trim()
                        .parse::<T>()
                        .map_err(|e| Error::Parse(format!("config key {key}: {s:?}: {e}")))
                };
                Ok((p(a)?, p(b)?))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grammar() {
        let cfg = RunConfig::parse(
            "# a comment\n\nn = 2000\nalpha=0.5\nk_critical = 1\npgf-grid = 0.5:0.5, 0.9:0.2\nn-grid = 500,2000\n",
        )
        .unwrap();
        assert_eq!(cfg.parsed::<usize>("n").unwrap(), Some(2000));
        assert_eq!(cfg.parsed::<f64>("k-critical").unwrap(), Some(1.0));
        assert_eq!(
            cfg.pairs::<f64>("pgf_grid").unwrap(),
            Some(vec![(0.5, 0.5), (0.9, 0.2)])
        );
        assert_eq!(cfg.list::<usize>("n-grid").unwrap(), Some(vec![500, 2000]));
        assert_eq!(cfg.parsed::<u64>("seed").unwrap(), None);
    }

    #[test]
    fn override_replaces() {
        let mut cfg = RunConfig::parse("n = 10").unwrap();
        cfg.set("n", "20");
        assert_eq!(cfg.parsed::<usize>("n").unwrap(), Some(20));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("n 10").is_err());
        assert!(RunConfig::parse("n = 1\nn = 2").is_err());
        assert!(RunConfig::parse("b@d = 1").is_err());
        let cfg = RunConfig::parse("n = ten\npgf-grid = 0.5").unwrap();
        assert!(cfg.parsed::<usize>("n").is_err());
        assert!(cfg.pairs::<f64>("pgf-grid").is_err());
    }
}
