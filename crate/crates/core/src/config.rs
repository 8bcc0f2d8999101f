//! Plain-text `key = value` configuration files.
//!
//! Blank lines and lines starting with `#` are ignored. Consumers take the
//! keys they understand; [`KvFile::finish`] rejects whatever is left.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct KvFile {
    path: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl KvFile {
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, i + 1, "expected `key = value`"))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::parse(path, i + 1, "empty key"));
            }
            if entries
                .insert(k.to_string(), (i + 1, v.trim().to_string()))
                .is_some()
            {
                return Err(Error::parse(path, i + 1, format!("duplicate key {k:?}")));
            }
        }
        Ok(Self {
            path: path.to_string(),
            entries,
        })
    }

    /// Removes `key` and parses its value; `None` when absent.
    pub fn take<T>(&mut self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| Error::parse(&self.path, line, format!("{key}: {e}"))),
        }
    }

    /// Comma-separated list, e.g. `fanouts = 20, 10, 10`.
    pub fn take_list<T>(&mut self, key: &str) -> Result<Option<Vec<T>>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|e| Error::parse(&self.path, line, format!("{key}: {e}")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    pub fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((k, (line, _))) => Err(Error::parse(self.path, line, format!("unknown key {k:?}"))),
        }
    }
}

pub(crate) fn join_list<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
