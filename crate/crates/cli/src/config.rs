//! `key = value` configuration files. Command-line flags take precedence
//! over file values, which take precedence over built-in defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};

use crate::exit::UsageError;

#[derive(Debug, Default)]
pub struct FileConfig {
    values: BTreeMap<String, String>,
    origin: String,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_").to_ascii_lowercase()
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(UsageError(format!("{origin}:{}: expected `key = value`", i + 1)).into());
            };
            let key = normalize(key);
            if key.is_empty() {
                return Err(UsageError(format!("{origin}:{}: empty key", i + 1)).into());
            }
            if values.insert(key.clone(), value.trim().to_owned()).is_some() {
                return Err(UsageError(format!("{origin}:{}: duplicate key {key}", i + 1)).into());
            }
        }
        Ok(Self {
            values,
            origin: origin.to_owned(),
        })
    }

    /// Removes and parses `key`.
    pub fn take<T>(&mut self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some(raw) = self.values.remove(&normalize(key)) else {
            return Ok(None);
        };
        raw.parse::<T>()
            .map(Some)
            .map_err(|e| UsageError(format!("{}: bad value for {key}: {raw:?} ({e})", self.origin)).into())
    }

    /// Flag value, else file value, else `default`.
    pub fn resolve<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        let file = self.take(key)?;
        Ok(flag.or(file).unwrap_or(default))
    }

    /// Flag value, else file value.
    pub fn resolve_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let file = self.take(key)?;
        Ok(flag.or(file))
    }

    /// Fails on keys no resolver asked for.
    pub fn finish(self) -> Result<()> {
        if let Some(key) = self.values.keys().next() {
            return Err(UsageError(format!("{}: unknown key {key}", self.origin)).into());
        }
        Ok(())
    }
}

/// Comma-separated list, as accepted for grids.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| x.parse::<T>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(List)
    }
}

impl<T: Display> Display for List<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// `on` / `off` switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Switch(pub bool);

impl FromStr for Switch {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "on" | "true" | "yes" | "1" => Ok(Switch(true)),
            "off" | "false" | "no" | "0" => Ok(Switch(false)),
            _ => Err(format!("expected on or off, got {s:?}")),
        }
    }
}

impl Display for Switch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(if self.0 { "on" } else { "off" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let mut c = FileConfig::parse("# comment\nd = 3\n p=0.4 # trailing\ndepth-cap = 7\n", "test").unwrap();
        assert_eq!(c.resolve("d", None, 2u32).unwrap(), 3);
        assert_eq!(c.resolve("p", Some(0.2), 0.1).unwrap(), 0.2);
        assert_eq!(c.resolve::<u32>("depth_cap", None, 1).unwrap(), 7);
        assert_eq!(c.resolve("trials", None, 10u64).unwrap(), 10);
        c.finish().unwrap();
    }

    #[test]
    fn rejects_junk() {
        assert!(FileConfig::parse("no equals sign", "t").is_err());
        assert!(FileConfig::parse("a = 1\na = 2", "t").is_err());
        let mut c = FileConfig::parse("d = two", "t").unwrap();
        assert!(c.take::<u32>("d").is_err());
        let c = FileConfig::parse("mystery = 1", "t").unwrap();
        assert!(c.finish().is_err());
    }

    #[test]
    fn lists_and_switches() {
        let l: List<f64> = "0.3, 0.35,0.4".parse().unwrap();
        assert_eq!(l.0, vec![0.3, 0.35, 0.4]);
        assert_eq!(l.to_string(), "0.3,0.35,0.4");
        assert_eq!("off".parse::<Switch>().unwrap(), Switch(false));
        assert!("maybe".parse::<Switch>().is_err());
    }
}
