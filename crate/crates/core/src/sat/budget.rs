use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

/// Resource limits for solving. `None` means unlimited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub conflicts: Option<u64>,
    pub time: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget::default()
    }

    pub fn conflicts(n: u64) -> Budget {
        Budget {
            conflicts: Some(n),
            time: None,
        }
    }

    pub fn millis(ms: u64) -> Budget {
        Budget {
            conflicts: None,
            time: Some(Duration::from_millis(ms)),
        }
    }

    pub fn is_unlimited(&self) -> bool {
        self.conflicts.is_none() && self.time.is_none()
    }

    /// True when nothing may be spent.
    pub fn is_zero(&self) -> bool {
        self.conflicts == Some(0) || self.time == Some(Duration::ZERO)
    }

    /// Component-wise minimum.
    pub fn min(&self, other: &Budget) -> Budget {
        fn min_opt<T: Ord>(a: Option<T>, b: Option<T>) -> Option<T> {
            match (a, b) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, None) => a,
                (None, b) => b,
            }
        }
        Budget {
            conflicts: min_opt(self.conflicts, other.conflicts),
            time: min_opt(self.time, other.time),
        }
    }
}

/// Tracks spending against a budget across many solver calls.
#[derive(Clone, Debug)]
pub struct Meter {
    budget: Budget,
    started: Instant,
    conflicts_used: u64,
}

impl Meter {
    pub fn new(budget: Budget) -> Meter {
        Meter {
            budget,
            started: Instant::now(),
            conflicts_used: 0,
        }
    }

    pub fn remaining(&self) -> Budget {
        Budget {
            conflicts: self
                .budget
                .conflicts
                .map(|c| c.saturating_sub(self.conflicts_used)),
            time: self
                .budget
                .time
                .map(|t| t.saturating_sub(self.started.elapsed())),
        }
    }

    pub fn charge(&mut self, conflicts: u64) {
        self.conflicts_used += conflicts;
    }

    pub fn conflicts_used(&self) -> u64 {
        self.conflicts_used
    }

    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }

    pub fn exhausted(&self) -> bool {
        self.remaining().is_zero()
    }
}
