//! Append-only record of invariant checks made during a coupled run.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How thoroughly a coupled run checks its invariants each tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    Off,
    /// Only what the tick changed: the moved pair and touched vertices.
    /// Complete, given that everything held before the tick.
    #[default]
    Incremental,
    /// Every live pair and every paired vertex, every tick.
    Full,
}

impl fmt::Display for CheckMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckMode::Off => "off",
            CheckMode::Incremental => "incremental",
            CheckMode::Full => "full",
        })
    }
}

impl FromStr for CheckMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "off" => Ok(Self::Off),
            "on" | "incremental" => Ok(Self::Incremental),
            "full" => Ok(Self::Full),
            _ => Err(Error::Parse {
                what: "invariant check mode",
                input: s.to_owned(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub tick: u64,
    pub invariant: String,
    pub small_frog: Option<usize>,
    pub large_frog: Option<usize>,
    pub expected: String,
    pub actual: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tick {}: {} violated (frogs {:?}/{:?}): expected {}, got {}",
            self.tick, self.invariant, self.small_frog, self.large_frog, self.expected, self.actual
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InvariantLog {
    pub ticks: u64,
    /// Number of checks made, per invariant.
    pub checks: BTreeMap<String, u64>,
    pub violations: u64,
    pub first_violation: Option<Violation>,
}

impl InvariantLog {
    pub fn is_clean(&self) -> bool {
        self.violations == 0
    }

    pub fn total_checks(&self) -> u64 {
        self.checks.values().sum()
    }

    /// Records one check; returns `ok`.
    pub(crate) fn check(
        &mut self,
        invariant: &str,
        ok: bool,
        frogs: (Option<usize>, Option<usize>),
        expected: impl FnOnce() -> String,
        actual: impl FnOnce() -> String,
    ) -> bool {
        match self.checks.get_mut(invariant) {
            Some(n) => *n += 1,
            None => {
                self.checks.insert(invariant.to_owned(), 1);
            }
        }
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(Violation {
                    tick: self.ticks,
                    invariant: invariant.to_owned(),
                    small_frog: frogs.0,
                    large_frog: frogs.1,
                    expected: expected(),
                    actual: actual(),
                });
            }
        }
        ok
    }

    pub(crate) fn check_eq<T: PartialEq + fmt::Debug>(
        &mut self,
        invariant: &str,
        frogs: (Option<usize>, Option<usize>),
        expected: T,
        actual: T,
    ) -> bool {
        let ok = expected == actual;
        self.check(
            invariant,
            ok,
            frogs,
            || format!("{expected:?}"),
            || format!("{actual:?}"),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_the_first_violation() {
        let mut log = InvariantLog {
            ticks: 3,
            ..Default::default()
        };
        assert!(log.check_eq("depth", (Some(1), Some(1)), 2, 2));
        assert!(!log.check_eq("depth", (Some(1), Some(1)), 2, 3));
        log.ticks = 4;
        assert!(!log.check_eq("bijection", (None, None), 5, 4));
        assert_eq!(log.violations, 2);
        assert_eq!(log.total_checks(), 3);
        let first = log.first_violation.unwrap();
        assert_eq!((first.tick, first.invariant.as_str()), (3, "depth"));
        assert_eq!(first.actual, "3");
    }

    #[test]
    fn modes_parse() {
        assert_eq!("on".parse::<CheckMode>().unwrap(), CheckMode::Incremental);
        assert_eq!("OFF".parse::<CheckMode>().unwrap(), CheckMode::Off);
        assert!("sometimes".parse::<CheckMode>().is_err());
    }
}
