//! INI-style configuration trees.
//!
//! The grammar is deliberately small: `[Section]` headers open a section,
//! `key = value` lines assign within it, lines starting with `#` are
//! comments, and surrounding whitespace is trimmed everywhere. Keys are
//! addressed as `Section.key`; later assignments overwrite earlier ones.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

/// Configuration errors: INI syntax, unparsable values, unknown choices.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("INI parse error at line {line}: {msg}")]
    Ini { line: usize, msg: String },
    #[error("invalid value {value:?} for key {key:?}")]
    BadValue { key: String, value: String },
    #[error("missing required key {0:?}")]
    MissingKey(String),
    #[error("unknown solver type {got:?}; valid types: {valid}")]
    UnknownSolverType { got: String, valid: &'static str },
}

/// Flat key-value store with dotted section addressing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParameterTree {
    entries: BTreeMap<String, String>,
}

impl ParameterTree {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses INI text. Malformed lines report their 1-based line number.
    pub fn parse_ini(text: &str) -> Result<Self, ConfigError> {
        let mut tree = ParameterTree::new();
        let mut section = String::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                match rest.strip_suffix(']') {
                    Some(name) => {
                        section = name.trim().to_string();
                    }
                    None => {
                        return Err(ConfigError::Ini {
                            line: no + 1,
                            msg: "unterminated section header".to_string(),
                        })
                    }
                }
                continue;
            }
            match line.split_once('=') {
                Some((key, value)) => {
                    let key = key.trim();
                    if key.is_empty() {
                        return Err(ConfigError::Ini {
                            line: no + 1,
                            msg: "empty key".to_string(),
                        });
                    }
                    let full = if section.is_empty() {
                        key.to_string()
                    } else {
                        format!("{section}.{key}")
                    };
                    tree.entries.insert(full, value.trim().to_string());
                }
                None => {
                    return Err(ConfigError::Ini {
                        line: no + 1,
                        msg: format!("expected 'key = value', got {line:?}"),
                    })
                }
            }
        }
        Ok(tree)
    }

    /// Sets a value programmatically; later assignments overwrite.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), value.into());
    }

    /// Copies all entries of `other` into `self`, overwriting collisions.
    pub fn merge_from(&mut self, other: &ParameterTree) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Typed lookup: `Ok(None)` when absent, error when present but
    /// unparsable.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| ConfigError::BadValue {
                key: key.to_string(),
                value: raw.clone(),
            }),
        }
    }

    /// Typed lookup with a default for absent keys.
    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}
