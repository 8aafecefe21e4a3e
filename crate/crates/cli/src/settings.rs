//! Flat `key = value` files. Command-line flags take precedence over file values.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

pub const CONFIG_SCHEMA: &str = "otbcd-config/1";
pub const MANIFEST_SCHEMA: &str = "otbcd-manifest/1";

#[derive(Clone, Debug, Default)]
pub struct KeyValues {
    map: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str, schema: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut seen_schema = false;
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').with_context(|| format!("line {}: expected `key = value`", n + 1))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "schema" {
                if v != schema {
                    bail!("line {}: schema `{v}` is not `{schema}`", n + 1);
                }
                seen_schema = true;
                continue;
            }
            if !seen_schema {
                bail!("line {}: the first entry must be `schema = {schema}`", n + 1);
            }
            map.insert(k.to_string(), v.to_string());
        }
        if !seen_schema {
            bail!("missing `schema = {schema}`");
        }
        Ok(Self { map })
    }

    pub fn read(path: &Path, schema: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, schema).with_context(|| format!("in {}", path.display()))
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| anyhow::anyhow!("key `{key}`: cannot parse `{v}`: {e}")),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: Display,
    {
        self.get(key)?.with_context(|| format!("missing key `{key}`"))
    }

    /// Flag value, else file value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: Display,
    {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    /// Flag value, else file value.
    pub fn pick_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        Ok(match flag {
            Some(v) => Some(v),
            None => self.get(key)?,
        })
    }

    pub fn set(&mut self, key: &str, value: impl Display) {
        self.map.insert(key.to_string(), value.to_string());
    }

    pub fn render(&self, schema: &str) -> String {
        let mut s = format!("schema = {schema}\n");
        for (k, v) in &self.map {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }
}

pub fn load_config(path: Option<&Path>) -> Result<KeyValues> {
    match path {
        Some(p) => KeyValues::read(p, CONFIG_SCHEMA),
        None => Ok(KeyValues::default()),
    }
}
