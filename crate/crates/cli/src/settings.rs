//! Flat `key = value` files. Blank lines and lines starting with `#` are
//! skipped; keys are case-insensitive and `-` is read as `_`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

impl Settings {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("line {}: expected key = value", i + 1)))?;
            values.insert(normalize(k), v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.values.get(&normalize(key)) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::config(format!("cannot parse {key} = {v:?}"))),
        }
    }
}
