//! Incremental SAT solving.
//!
//! A [`SolverSession`] owns a backend and only ever grows: clauses are
//! conjoined permanently and variables are reserved above the current
//! count. Each [`SolverSession::solve`] call takes a resource [`Budget`] and
//! a decision [`Polarity`]; polarity changes which model is returned, never
//! the verdict.

mod backtrack;
mod budget;
mod cdcl;
mod heap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Assignment, Clause, FreshVars, Lit, Var};

pub use backtrack::BacktrackSolver;
pub use budget::{Budget, Meter};
pub use cdcl::CdclSolver;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("literal {lit} refers to a variable beyond the session's {num_vars} variables")]
    LiteralOutOfRange { lit: i64, num_vars: u32 },
}

/// Preferred value for decision variables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    PreferFalse,
    PreferTrue,
    /// Phase saving, initially false.
    #[default]
    Default,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    /// Total over the session's variables at the time of the call.
    Sat(Assignment),
    Unsat,
    BudgetExhausted,
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SolveOutcome::Unsat)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
}

/// Incremental solver interface implemented by every backend.
pub trait SatBackend: Send {
    fn num_vars(&self) -> u32;

    /// Adds `n` variables and returns the first of them.
    fn reserve_fresh(&mut self, n: u32) -> Var;

    fn add_clause(&mut self, lits: &[Lit]) -> Result<(), SatError>;

    fn solve(&mut self, budget: &Budget, polarity: Polarity) -> SolveOutcome;

    fn stats(&self) -> SolverStats;
}

/// Available backends.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Cdcl,
    /// Plain DPLL; small instances only.
    Backtrack,
}

impl BackendKind {
    pub fn create(self, num_vars: u32, seed: u64) -> Box<dyn SatBackend> {
        match self {
            BackendKind::Cdcl => Box::new(CdclSolver::new(num_vars, seed)),
            BackendKind::Backtrack => Box::new(BacktrackSolver::new(num_vars)),
        }
    }
}

/// A single-threaded incremental solving session.
pub struct SolverSession {
    backend: Box<dyn SatBackend>,
    log: Option<Vec<Clause>>,
    solve_calls: u64,
}

impl std::fmt::Debug for SolverSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SolverSession")
            .field("num_vars", &self.backend.num_vars())
            .field("solve_calls", &self.solve_calls)
            .finish()
    }
}

impl SolverSession {
    /// A session on the CDCL backend.
    pub fn new(num_vars: u32) -> SolverSession {
        SolverSession::with_backend(BackendKind::Cdcl, num_vars, 0)
    }

    pub fn with_backend(kind: BackendKind, num_vars: u32, seed: u64) -> SolverSession {
        SolverSession {
            backend: kind.create(num_vars, seed),
            log: None,
            solve_calls: 0,
        }
    }

    /// Keeps a copy of every clause added from now on.
    pub fn record_clauses(&mut self) {
        self.log.get_or_insert_with(Vec::new);
    }

    pub fn clause_log(&self) -> Option<&[Clause]> {
        self.log.as_deref()
    }

    pub fn num_vars(&self) -> u32 {
        self.backend.num_vars()
    }

    pub fn reserve_fresh(&mut self, n: u32) -> Var {
        self.backend.reserve_fresh(n)
    }

    pub fn add_clause(&mut self, lits: &[Lit]) -> Result<(), SatError> {
        self.backend.add_clause(lits)?;
        if let Some(log) = &mut self.log {
            if let Some(c) = Clause::new(lits.iter().copied()) {
                log.push(c);
            }
        }
        Ok(())
    }

    pub fn add(&mut self, clause: &Clause) -> Result<(), SatError> {
        self.add_clause(clause.lits())
    }

    pub fn add_all<'a>(
        &mut self,
        clauses: impl IntoIterator<Item = &'a Clause>,
    ) -> Result<(), SatError> {
        for c in clauses {
            self.add(c)?;
        }
        Ok(())
    }

    pub fn solve(&mut self, budget: &Budget, polarity: Polarity) -> SolveOutcome {
        self.solve_calls += 1;
        self.backend.solve(budget, polarity)
    }

    /// Solve with a meter: the call gets the meter's remaining budget capped
    /// by `per_call`, and the conflicts spent are charged to the meter.
    pub fn solve_metered(
        &mut self,
        meter: &mut Meter,
        per_call: &Budget,
        polarity: Polarity,
    ) -> SolveOutcome {
        let before = self.backend.stats().conflicts;
        let outcome = self.solve(&meter.remaining().min(per_call), polarity);
        meter.charge(self.backend.stats().conflicts - before);
        outcome
    }

    pub fn solve_calls(&self) -> u64 {
        self.solve_calls
    }

    pub fn stats(&self) -> SolverStats {
        self.backend.stats()
    }
}

impl FreshVars for SolverSession {
    fn fresh(&mut self) -> Var {
        self.reserve_fresh(1)
    }
}

/// Whether some extension of `fixed` (over the first variables) satisfies
/// `clauses` over `num_vars` variables. Used by tests to project clause
/// stores that contain auxiliary variables.
pub fn extension_exists(clauses: &[Clause], num_vars: u32, fixed: &Assignment) -> bool {
    let mut s = SolverSession::new(num_vars.max(fixed.len() as u32));
    for c in clauses {
        s.add(c).expect("clauses within declared universe");
    }
    for l in fixed.lits() {
        s.add_clause(&[l])
            .expect("fixed assignment within universe");
    }
    s.solve(&Budget::unlimited(), Polarity::Default).is_sat()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{CnfFormula, Lit};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lit(v: i64) -> Lit {
        Lit::from_dimacs(v)
    }

    fn both() -> [BackendKind; 2] {
        [BackendKind::Cdcl, BackendKind::Backtrack]
    }

    #[test]
    fn empty_session_is_sat() {
        for kind in both() {
            let mut s = SolverSession::with_backend(kind, 0, 0);
            assert_eq!(
                s.solve(&Budget::unlimited(), Polarity::Default),
                SolveOutcome::Sat(Assignment::zeros(0))
            );
        }
    }

    #[test]
    fn unit_clause_forces_value() {
        for kind in both() {
            let mut s = SolverSession::with_backend(kind, 2, 0);
            s.add_clause(&[lit(1)]).unwrap();
            match s.solve(&Budget::unlimited(), Polarity::PreferFalse) {
                SolveOutcome::Sat(m) => {
                    assert_eq!(m.len(), 2);
                    assert!(m.get(Var::new(1)));
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn contradictory_units() {
        for kind in both() {
            let mut s = SolverSession::with_backend(kind, 1, 0);
            s.add_clause(&[lit(1)]).unwrap();
            s.add_clause(&[lit(-1)]).unwrap();
            assert_eq!(
                s.solve(&Budget::unlimited(), Polarity::Default),
                SolveOutcome::Unsat
            );
        }
    }

    #[test]
    fn empty_clause_makes_everything_unsat() {
        for kind in both() {
            let mut s = SolverSession::with_backend(kind, 2, 0);
            s.add_clause(&[]).unwrap();
            assert!(s.solve(&Budget::unlimited(), Polarity::Default).is_unsat());
            s.add_clause(&[lit(2)]).unwrap();
            assert!(s
                .solve(&Budget::unlimited(), Polarity::PreferTrue)
                .is_unsat());
        }
    }

    #[test]
    fn out_of_range_literal() {
        for kind in both() {
            let mut s = SolverSession::with_backend(kind, 2, 0);
            assert_eq!(
                s.add_clause(&[lit(3)]),
                Err(SatError::LiteralOutOfRange {
                    lit: 3,
                    num_vars: 2
                })
            );
        }
    }

    #[test]
    fn reserve_fresh_allocates_disjoint_ranges() {
        for kind in both() {
            let mut s = SolverSession::with_backend(kind, 3, 0);
            assert_eq!(s.reserve_fresh(1), Var::new(4));
            assert_eq!(s.reserve_fresh(2), Var::new(5));
            assert_eq!(s.num_vars(), 6);
            // Unconstrained fresh variables follow the decision polarity.
            match s.solve(&Budget::unlimited(), Polarity::PreferTrue) {
                SolveOutcome::Sat(m) => assert!(m.values().iter().all(|&b| b)),
                other => panic!("{other:?}"),
            }
            match s.solve(&Budget::unlimited(), Polarity::PreferFalse) {
                SolveOutcome::Sat(m) => assert!(m.values().iter().all(|&b| !b)),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn models_satisfy_clauses() {
        for kind in both() {
            let mut s = SolverSession::with_backend(kind, 2, 0);
            s.add_clause(&[lit(1), lit(2)]).unwrap();
            match s.solve(&Budget::unlimited(), Polarity::PreferFalse) {
                SolveOutcome::Sat(m) => assert!(m.get(Var::new(1)) || m.get(Var::new(2))),
                other => panic!("{other:?}"),
            }
            let mut s = SolverSession::with_backend(kind, 2, 0);
            s.add_clause(&[lit(-1), lit(2)]).unwrap();
            match s.solve(&Budget::unlimited(), Polarity::PreferTrue) {
                SolveOutcome::Sat(m) => assert!(!m.get(Var::new(1)) || m.get(Var::new(2))),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn zero_budget_is_exhausted() {
        let mut s = SolverSession::new(1);
        assert_eq!(
            s.solve(&Budget::conflicts(0), Polarity::Default),
            SolveOutcome::BudgetExhausted
        );
        assert!(s.solve(&Budget::unlimited(), Polarity::Default).is_sat());
    }

    /// Pigeonhole: `holes + 1` pigeons into `holes` holes.
    fn pigeonhole(holes: u32) -> CnfFormula {
        let pigeons = holes + 1;
        let var = |p: u32, h: u32| (p * holes + h + 1) as i64;
        let mut f = CnfFormula::new(pigeons * holes);
        for p in 0..pigeons {
            f.add_lits((0..holes).map(|h| lit(var(p, h)))).unwrap();
        }
        for h in 0..holes {
            for p in 0..pigeons {
                for q in p + 1..pigeons {
                    f.add_lits([lit(-var(p, h)), lit(-var(q, h))]).unwrap();
                }
            }
        }
        f
    }

    #[test]
    fn pigeonhole_unsat_and_budget() {
        let f = pigeonhole(6);
        let mut s = SolverSession::new(f.num_vars());
        s.add_all(f.clauses()).unwrap();
        assert_eq!(
            s.solve(&Budget::conflicts(10), Polarity::Default),
            SolveOutcome::BudgetExhausted
        );
        assert_eq!(
            s.solve(&Budget::unlimited(), Polarity::Default),
            SolveOutcome::Unsat
        );
        // Monotone: stays unsat.
        assert_eq!(
            s.solve(&Budget::unlimited(), Polarity::PreferTrue),
            SolveOutcome::Unsat
        );
    }

    #[test]
    fn conflict_budget_is_deterministic() {
        let f = pigeonhole(7);
        let run = || {
            let mut s = SolverSession::with_backend(BackendKind::Cdcl, f.num_vars(), 42);
            s.add_all(f.clauses()).unwrap();
            (0..4)
                .map(|_| s.solve(&Budget::conflicts(300), Polarity::Default))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    fn random_cnf(rng: &mut ChaCha8Rng, n: u32, m: usize) -> CnfFormula {
        let mut f = CnfFormula::new(n);
        for _ in 0..m {
            let len = rng.gen_range(1..=3);
            let lits: Vec<Lit> = (0..len)
                .map(|_| Lit::new(Var::new(rng.gen_range(1..=n)), rng.gen()))
                .collect();
            f.add_lits(lits).unwrap();
        }
        f
    }

    fn brute_force_sat(f: &CnfFormula) -> bool {
        (0..1u64 << f.num_vars()).any(|b| {
            f.evaluate(&Assignment::from_bits(f.num_vars() as usize, b))
                .unwrap()
        })
    }

    #[test]
    fn agrees_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for round in 0..400 {
            let n = rng.gen_range(1..=20);
            let m = rng.gen_range(0..(n as usize * 5));
            let f = random_cnf(&mut rng, n, m);
            let expected = if n <= 14 {
                Some(brute_force_sat(&f))
            } else {
                None
            };
            let mut verdicts = Vec::new();
            for kind in both() {
                for pol in [
                    Polarity::PreferFalse,
                    Polarity::PreferTrue,
                    Polarity::Default,
                ] {
                    let mut s = SolverSession::with_backend(kind, n, round);
                    s.add_all(f.clauses()).unwrap();
                    let out = s.solve(&Budget::unlimited(), pol);
                    if let SolveOutcome::Sat(m) = &out {
                        assert!(f.evaluate(m).unwrap());
                    }
                    verdicts.push(out.is_sat());
                }
            }
            assert!(
                verdicts.windows(2).all(|w| w[0] == w[1]),
                "round {round}: {verdicts:?}"
            );
            if let Some(e) = expected {
                assert_eq!(verdicts[0], e, "round {round}");
            }
        }
    }

    #[test]
    fn incremental_additions_match_fresh_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(3..=12);
            let f = random_cnf(&mut rng, n, 4 * n as usize);
            let mut inc = SolverSession::new(n);
            let mut prefix = CnfFormula::new(n);
            let mut was_unsat = false;
            for c in f.clauses() {
                inc.add(c).unwrap();
                prefix.add_clause(c.clone()).unwrap();
                let out = inc.solve(&Budget::unlimited(), Polarity::PreferFalse);
                if was_unsat {
                    assert!(out.is_unsat());
                }
                was_unsat = out.is_unsat();
                assert_eq!(out.is_sat(), brute_force_sat(&prefix));
            }
        }
    }

    proptest! {
        #[test]
        fn polarity_never_changes_verdict(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..=16);
            let m = rng.gen_range(n as usize..(5 * n as usize));
            let f = random_cnf(&mut rng, n, m);
            let verdicts: Vec<bool> = [Polarity::PreferFalse, Polarity::PreferTrue, Polarity::Default]
                .into_iter()
                .map(|p| {
                    let mut s = SolverSession::new(n);
                    s.add_all(f.clauses()).unwrap();
                    s.solve(&Budget::unlimited(), p).is_sat()
                })
                .collect();
            prop_assert!(verdicts.iter().all(|&v| v == verdicts[0]));
        }
    }

    #[test]
    fn extension_exists_projects() {
        // r ↔ x1 with ¬r asserted: only x1 = 0 extends.
        let c = |v: &[i64]| Clause::new(v.iter().map(|&x| lit(x))).unwrap();
        let clauses = vec![c(&[-2, 1]), c(&[-1, 2]), c(&[-2])];
        assert!(extension_exists(&clauses, 2, &Assignment::from_str01("0")));
        assert!(!extension_exists(&clauses, 2, &Assignment::from_str01("1")));
    }
}
