//! `key=value` configuration files. `#` starts a comment line; blank lines
//! are ignored; later keys override earlier ones.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", i + 1)));
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&super::read_to_string(path)?)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|e: T::Err| Error::Config(format!("{key}: `{v}`: {e}")))
            })
            .transpose()
    }

    /// Comma-separated list value.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        let item = item.trim();
                        item.parse()
                            .map_err(|e: T::Err| Error::Config(format!("{key}: `{item}`: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_lists() {
        let kv = KeyValues::parse("# fixture\nn = 10\nprevalence=0.5, 0.25\n\nseed=3\nseed=4\n").unwrap();
        assert_eq!(kv.get::<usize>("n").unwrap(), Some(10));
        assert_eq!(kv.get::<u64>("seed").unwrap(), Some(4));
        assert_eq!(kv.get_list::<f64>("prevalence").unwrap(), Some(vec![0.5, 0.25]));
        assert_eq!(kv.get::<f64>("missing").unwrap(), None);
        assert!(kv.get::<u8>("prevalence").is_err());
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(KeyValues::parse("just words\n").is_err());
        assert!(KeyValues::parse("=3\n").is_err());
    }
}
