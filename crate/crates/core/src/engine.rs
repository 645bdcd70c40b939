//! Types shared by the abstraction-refinement engines.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::FormulaError;
use crate::sat::{Polarity, SatError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error("flip set {0} was already used to refine the abstraction")]
    DuplicateDescriptor(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
    #[error("{0}")]
    Precondition(String),
}

/// Which decision polarity each solver call uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolarityPolicy {
    /// Prefer 0 when looking for counterexamples and 1 when looking for
    /// smaller models, so counterexamples tend to be low and flip sets small.
    #[default]
    Heuristic,
    /// The same polarity for every call.
    Fixed(Polarity),
}

impl PolarityPolicy {
    pub fn counterexample(self) -> Polarity {
        match self {
            PolarityPolicy::Heuristic => Polarity::PreferFalse,
            PolarityPolicy::Fixed(p) => p,
        }
    }

    pub fn witness(self) -> Polarity {
        match self {
            PolarityPolicy::Heuristic => Polarity::PreferTrue,
            PolarityPolicy::Fixed(p) => p,
        }
    }
}

/// How refinements encode the negated reduced formula.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// Clause representatives are shared across refinements, keyed by the
    /// content of the reduced clause.
    #[default]
    Shared,
    /// Every refinement re-encodes its reduced formula with fresh
    /// representatives.
    Naive,
}

/// Counters for one engine run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    /// Refinements performed.
    pub iterations: u64,
    pub solver_calls: u64,
    pub conflicts: u64,
    #[serde(with = "millis")]
    pub elapsed: Duration,
}

impl RunStats {
    pub fn absorb(&mut self, other: &RunStats) {
        self.iterations += other.iterations;
        self.solver_calls += other.solver_calls;
        self.conflicts += other.conflicts;
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64() * 1000.0)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let ms = f64::deserialize(d)?;
        Ok(Duration::from_secs_f64(ms / 1000.0))
    }
}

pub(crate) fn fmt_set(set: &crate::formula::VarSet) -> String {
    let items: Vec<String> = set.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", items.join(","))
}
