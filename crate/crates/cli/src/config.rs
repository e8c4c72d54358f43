//! `key = value` run files. Keys are the long flag names; `#` starts a
//! comment. Command-line flags override file values.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const KEYS: &[&str] = &[
    "problem",
    "degree",
    "aux-degree",
    "mode",
    "levels",
    "theta",
    "estimator",
    "strict-a2",
    "out",
    "threads",
    "sequential",
    "mu2",
    "n0",
    "sizes",
    "max-dofs",
    "reference-levels",
    "face-solver",
    "backend",
    "tol",
    "max-iter",
    "vtk",
];

#[derive(Debug, Default, PartialEq)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {}: expected key = value, got '{raw}'", i + 1);
            };
            let key = k.trim().replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key '{}'", i + 1, k.trim());
            }
            let v = v.trim().trim_matches('"').to_string();
            if values.insert(key.clone(), v).is_some() {
                bail!("line {}: duplicate key '{key}'", i + 1);
            }
        }
        Ok(FileConfig { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Typed value for `key`, if present.
    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("bad value '{v}' for '{key}': {e}")),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}

/// Comma-separated list of mesh resolutions.
pub fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("'{x}': {e}")))
        .collect()
}
