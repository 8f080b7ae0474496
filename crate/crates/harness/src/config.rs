//! `key = value` config files with one section per command.
//!
//! ```text
//! seed = 7
//! [sweep]
//! edge = IS,ID
//! metric = h2
//! ```
//!
//! Keys outside any section, or under `[global]`, apply to every command.
//! Dashes and underscores in keys are interchangeable.

use std::path::Path;
use std::str::FromStr;

use ini::Ini;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    ini: Option<Ini>,
}

impl ConfigFile {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(Self { ini: Some(ini) })
    }

    /// Raw value of `key`, looked up in `section`, then `[global]`, then the
    /// unnamed top section.
    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        let ini = self.ini.as_ref()?;
        let alt = key.replace('-', "_");
        let alt2 = key.replace('_', "-");
        let lookup = |sec: Option<&str>| {
            let props = ini.section(sec)?;
            props.get(key).or_else(|| props.get(&alt)).or_else(|| props.get(&alt2))
        };
        lookup(Some(section))
            .or_else(|| lookup(Some("global")))
            .or_else(|| lookup(None))
            .map(str::trim)
    }

    /// Typed value of `key`, or `None` when absent.
    pub fn parsed<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(section, key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| HarnessError::Config(format!("[{section}] {key} = {v}: {e}")))
            })
            .transpose()
    }
}

/// Command-line value if given, else the file value.
pub fn pick<T: FromStr>(cli: Option<T>, file: &ConfigFile, section: &str, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match cli {
        Some(v) => Ok(Some(v)),
        None => file.parsed(section, key),
    }
}

/// Comma-separated list.
pub fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse::<T>()
                .map_err(|e| HarnessError::Usage(format!("{what}: cannot parse '{x}': {e}")))
        })
        .collect()
}

/// Comma-separated list of exactly `N` numbers.
pub fn parse_fixed<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let v: Vec<f64> = parse_list(s, what)?;
    v.try_into()
        .map_err(|v: Vec<f64>| HarnessError::Usage(format!("{what}: expected {N} values, got {}", v.len())))
}
