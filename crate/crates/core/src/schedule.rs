//! Choosing which awake frog moves next.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulePolicy {
    /// Uniformly chosen awake frog each tick.
    #[default]
    UniformRandom,
    /// Round robin: the frog that has waited longest moves next.
    Fifo,
}

impl fmt::Display for SchedulePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchedulePolicy::UniformRandom => "uniform",
            SchedulePolicy::Fifo => "fifo",
        })
    }
}

impl FromStr for SchedulePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" | "uniform_random" | "random" => Ok(Self::UniformRandom),
            "fifo" => Ok(Self::Fifo),
            _ => Err(Error::Parse {
                what: "schedule policy",
                input: s.to_owned(),
            }),
        }
    }
}

/// Picks the next frog from `awake`, listed in insertion order.
pub fn schedule_next<R: Rng + ?Sized>(awake: &[usize], policy: SchedulePolicy, rng: &mut R) -> Result<usize> {
    if awake.is_empty() {
        return Err(Error::EmptySchedule);
    }
    Ok(match policy {
        SchedulePolicy::UniformRandom => awake[rng.random_range(0..awake.len())],
        SchedulePolicy::Fifo => awake[0],
    })
}

/// The set of awake frog ids. A frog is taken out while it moves and
/// handed back with [`AwakeSet::push`] if it survives.
#[derive(Debug, Clone, Default)]
pub struct AwakeSet {
    policy: SchedulePolicy,
    queue: VecDeque<usize>,
}

impl AwakeSet {
    pub fn new(policy: SchedulePolicy) -> Self {
        Self {
            policy,
            queue: VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn push(&mut self, frog: usize) {
        self.queue.push_back(frog);
    }

    pub fn take<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<usize> {
        match self.policy {
            SchedulePolicy::Fifo => self.queue.pop_front(),
            SchedulePolicy::UniformRandom => {
                if self.queue.is_empty() {
                    return None;
                }
                let i = rng.random_range(0..self.queue.len());
                self.queue.swap_remove_back(i)
            }
        }
    }

    pub fn retain(&mut self, keep: impl FnMut(&usize) -> bool) {
        self.queue.retain(keep);
    }

    pub fn iter(&self) -> impl Iterator<Item = &usize> {
        self.queue.iter()
    }
}
