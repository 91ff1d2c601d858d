//! Flat `key = value` text files with `#` comments.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One `key = value` line, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

impl Entry {
    pub fn parse<T: FromStr>(&self) -> Result<T> {
        self.value
            .parse()
            .map_err(|_| self.error(format!("invalid value `{}` for `{}`", self.value, self.key)))
    }

    pub fn error(&self, message: impl Into<String>) -> Error {
        Error::Config {
            line: self.line,
            message: message.into(),
        }
    }

    /// Splits the value on commas and/or whitespace and parses each field.
    pub fn fields<T: FromStr>(&self) -> Result<Vec<T>> {
        self.value
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse()
                    .map_err(|_| self.error(format!("invalid field `{s}` in `{}`", self.key)))
            })
            .collect()
    }
}

pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
            line: k + 1,
            message: format!("expected key=value, found `{line}`"),
        })?;
        entries.push(Entry {
            line: k + 1,
            key: key.trim().to_ascii_lowercase(),
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}

pub fn read_entries(path: &Path) -> Result<Vec<Entry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_entries(&text)
}

pub(crate) fn parse_bool(entry: &Entry) -> Result<bool> {
    match entry.value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(entry.error(format!("invalid boolean `{}`", entry.value))),
    }
}
