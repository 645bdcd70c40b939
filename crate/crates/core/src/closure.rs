//! The set of all variables free for negation, computed in rounds with an
//! escalating per-test budget.
//!
//! Each round tests the unresolved variables with the current budget.
//! Variables proven free are negated in the working formula, which keeps its
//! minimal models unchanged and gives later tests more to propagate. Tests
//! that run out of budget are retried in the next round with the budget
//! multiplied by `k`, up to a cap.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{EngineError, RunStats};
use crate::ffn::{free_for_negation, FfnConfig, FfnOutcome};
use crate::formula::{CnfFormula, Var, VarSet};
use crate::sat::{Budget, Polarity, SolveOutcome, SolverSession};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BudgetUnit {
    Conflicts,
    Millis,
    /// Every test runs to completion; a single round.
    Unlimited,
}

/// When units learned during a round reach the remaining tests.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitMode {
    /// Right after the test that proved them.
    #[default]
    Greedy,
    /// Only at the end of the round.
    RoundBoundary,
}

#[derive(Clone, Debug)]
pub struct ScheduleConfig {
    pub unit: BudgetUnit,
    pub initial: u64,
    pub multiplier: f64,
    pub max: u64,
    /// Variables to test, in this order. Defaults to the whole universe.
    pub candidates: Option<Vec<Var>>,
    pub unit_mode: UnitMode,
    /// Run a round's tests concurrently. Implies round-boundary units.
    pub parallel: bool,
    /// Settings for the individual tests; its budget is overwritten.
    pub ffn: FfnConfig,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            unit: BudgetUnit::Millis,
            initial: 1000,
            multiplier: 2.0,
            max: 32_000,
            candidates: None,
            unit_mode: UnitMode::Greedy,
            parallel: false,
            ffn: FfnConfig::default(),
        }
    }
}

impl ScheduleConfig {
    /// Conflict budgets, deterministic across machines.
    pub fn conflicts() -> Self {
        ScheduleConfig {
            unit: BudgetUnit::Conflicts,
            initial: 20_000,
            max: 32 * 20_000,
            ..ScheduleConfig::default()
        }
    }

    pub fn unlimited() -> Self {
        ScheduleConfig {
            unit: BudgetUnit::Unlimited,
            ..ScheduleConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.unit == BudgetUnit::Unlimited {
            return Ok(());
        }
        if self.initial == 0 {
            return Err(EngineError::Precondition("initial budget must be positive".into()));
        }
        if !(self.multiplier > 1.0 && self.multiplier.is_finite()) {
            return Err(EngineError::Precondition(format!(
                "budget multiplier {} must be greater than 1",
                self.multiplier
            )));
        }
        if self.max < self.initial {
            return Err(EngineError::Precondition(format!(
                "maximum budget {} is below the initial budget {}",
                self.max, self.initial
            )));
        }
        Ok(())
    }

    fn budget(&self, amount: u64) -> Budget {
        match self.unit {
            BudgetUnit::Conflicts => Budget::conflicts(amount),
            BudgetUnit::Millis => Budget::millis(amount),
            BudgetUnit::Unlimited => Budget::unlimited(),
        }
    }

    fn next(&self, amount: u64) -> u64 {
        let scaled = (amount as f64 * self.multiplier).ceil();
        if scaled >= self.max as f64 {
            self.max
        } else {
            (scaled as u64).max(amount + 1)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarStatus {
    Free,
    NotFree,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundInfo {
    /// Per-test budget; 0 when unlimited.
    pub budget: u64,
    pub tested: usize,
    pub resolved: usize,
    pub proven_free: Vec<Var>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureResult {
    pub free: VarSet,
    /// No candidate is unresolved.
    pub exact: bool,
    pub status: BTreeMap<Var, VarStatus>,
    pub rounds: Vec<RoundInfo>,
    /// The formula has no models, so every variable is free.
    pub vacuous: bool,
    /// Free variables in the order their negations were conjoined.
    pub learned_units: Vec<Var>,
    pub stats: RunStats,
}

impl ClosureResult {
    pub fn not_free(&self) -> VarSet {
        self.with_status(VarStatus::NotFree)
    }

    pub fn unresolved(&self) -> VarSet {
        self.with_status(VarStatus::Unresolved)
    }

    fn with_status(&self, s: VarStatus) -> VarSet {
        self.status.iter().filter(|(_, &v)| v == s).map(|(&k, _)| k).collect()
    }
}

fn candidates(phi: &CnfFormula, cfg: &ScheduleConfig) -> Result<Vec<Var>, EngineError> {
    let all: Vec<Var> = (1..=phi.num_vars()).map(Var::new).collect();
    let Some(list) = &cfg.candidates else {
        return Ok(all);
    };
    let mut seen = VarSet::new();
    for &v in list {
        if v.get() > phi.num_vars() {
            return Err(EngineError::Precondition(format!(
                "candidate {v} outside the formula's {} variables",
                phi.num_vars()
            )));
        }
        if !seen.insert(v) {
            return Err(EngineError::Precondition(format!("candidate {v} listed twice")));
        }
    }
    Ok(list.clone())
}

/// Undecided within `budget` counts as satisfiable; the tests then run as usual.
fn is_unsat(phi: &CnfFormula, cfg: &FfnConfig, budget: &Budget, stats: &mut RunStats) -> Result<bool, EngineError> {
    let mut s = SolverSession::with_backend(cfg.backend, phi.num_vars(), cfg.seed);
    s.add_all(phi.clauses())?;
    let out = s.solve(budget, Polarity::Default);
    stats.solver_calls += 1;
    stats.conflicts += s.stats().conflicts;
    Ok(matches!(out, SolveOutcome::Unsat))
}

/// Computes the variables that are 0 in every minimal model of `φ`.
pub fn free_for_negation_all(phi: &CnfFormula, cfg: &ScheduleConfig) -> Result<ClosureResult, EngineError> {
    cfg.validate()?;
    let started = Instant::now();
    let mut stats = RunStats::default();
    let pending = candidates(phi, cfg)?;

    if is_unsat(phi, &cfg.ffn, &cfg.budget(cfg.max), &mut stats)? {
        stats.elapsed = started.elapsed();
        return Ok(ClosureResult {
            free: pending.iter().copied().collect(),
            exact: true,
            status: pending.iter().map(|&v| (v, VarStatus::Free)).collect(),
            rounds: Vec::new(),
            vacuous: true,
            learned_units: Vec::new(),
            stats,
        });
    }

    let mut status: BTreeMap<Var, VarStatus> = pending.iter().map(|&v| (v, VarStatus::Unresolved)).collect();
    let mut pending = pending;
    let mut working = phi.clone();
    let mut learned = Vec::new();
    let mut rounds = Vec::new();
    let mut amount = if cfg.unit == BudgetUnit::Unlimited { 0 } else { cfg.initial };
    let round_boundary = cfg.parallel || cfg.unit_mode == UnitMode::RoundBoundary;

    while !pending.is_empty() {
        let mut ffn = cfg.ffn.clone();
        ffn.budget = cfg.budget(amount);
        let mut info = RoundInfo {
            budget: amount,
            tested: pending.len(),
            resolved: 0,
            proven_free: Vec::new(),
        };
        let outcomes: Vec<(Var, FfnOutcome)> = if cfg.parallel {
            let round_phi = &working;
            pending
                .par_iter()
                .map(|&x| free_for_negation(round_phi, x, &ffn).map(|o| (x, o)))
                .collect::<Result<_, _>>()?
        } else {
            let round_phi = working.clone();
            let mut out = Vec::with_capacity(pending.len());
            for &x in &pending {
                let phi = if round_boundary { &round_phi } else { &working };
                let o = free_for_negation(phi, x, &ffn)?;
                if o.answer() == Some(true) && !round_boundary {
                    working = working.with_negative_units([x])?;
                    learned.push(x);
                }
                out.push((x, o));
            }
            out
        };

        let mut still = Vec::new();
        for (x, o) in outcomes {
            stats.absorb(&o.stats);
            match o.answer() {
                None => still.push(x),
                Some(free) => {
                    info.resolved += 1;
                    status.insert(x, if free { VarStatus::Free } else { VarStatus::NotFree });
                    if free {
                        info.proven_free.push(x);
                        if round_boundary {
                            working = working.with_negative_units([x])?;
                            learned.push(x);
                        }
                    }
                }
            }
        }
        let progress = info.resolved > 0;
        rounds.push(info);
        pending = still;
        if pending.is_empty() || cfg.unit == BudgetUnit::Unlimited {
            break;
        }
        if amount >= cfg.max {
            // A round at the cap that learned nothing would repeat itself.
            if !progress {
                break;
            }
        } else {
            amount = cfg.next(amount);
        }
    }

    stats.elapsed = started.elapsed();
    let free: VarSet = status
        .iter()
        .filter(|(_, &s)| s == VarStatus::Free)
        .map(|(&v, _)| v)
        .collect();
    Ok(ClosureResult {
        free,
        exact: pending.is_empty(),
        status,
        rounds,
        vacuous: false,
        learned_units: learned,
        stats,
    })
}

/// `φ` together with the negations of its variables free for negation.
#[derive(Clone, Debug)]
pub struct GcwaClosure {
    pub formula: CnfFormula,
    pub exact: bool,
    pub result: ClosureResult,
}

pub fn gcwa_closure(phi: &CnfFormula, cfg: &ScheduleConfig) -> Result<GcwaClosure, EngineError> {
    let result = free_for_negation_all(phi, cfg)?;
    let formula = phi.with_negative_units(result.free.iter().copied())?;
    Ok(GcwaClosure {
        formula,
        exact: result.exact,
        result,
    })
}
