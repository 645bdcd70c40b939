use std::time::Instant;

use super::{Budget, Polarity, SatBackend, SatError, SolveOutcome, SolverStats};
use crate::formula::{Assignment, Lit, Var};

/// Chronological DPLL with naive unit propagation. Kept as a differential
/// reference for the CDCL solver; exponential on anything non-trivial.
pub struct BacktrackSolver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    stats: SolverStats,
}

impl BacktrackSolver {
    pub fn new(num_vars: u32) -> BacktrackSolver {
        BacktrackSolver {
            num_vars: num_vars as usize,
            clauses: Vec::new(),
            stats: SolverStats::default(),
        }
    }

    fn value(assign: &[Option<bool>], l: Lit) -> Option<bool> {
        assign[l.var().index()].map(|v| v == l.is_positive())
    }

    /// Unit propagation to fixpoint; returns false on conflict. Newly
    /// assigned variables are pushed to `trail`.
    fn propagate(&mut self, assign: &mut [Option<bool>], trail: &mut Vec<usize>) -> bool {
        loop {
            let mut changed = false;
            for c in &self.clauses {
                let mut unassigned = None;
                let mut count = 0;
                let mut sat = false;
                for &l in c {
                    match Self::value(assign, l) {
                        Some(true) => {
                            sat = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            count += 1;
                            unassigned = Some(l);
                        }
                    }
                }
                if sat {
                    continue;
                }
                match count {
                    0 => return false,
                    1 => {
                        let l = unassigned.unwrap();
                        assign[l.var().index()] = Some(l.is_positive());
                        trail.push(l.var().index());
                        self.stats.propagations += 1;
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }
}

impl SatBackend for BacktrackSolver {
    fn num_vars(&self) -> u32 {
        self.num_vars as u32
    }

    fn reserve_fresh(&mut self, n: u32) -> Var {
        let first = Var::from_index(self.num_vars);
        self.num_vars += n as usize;
        first
    }

    fn add_clause(&mut self, lits: &[Lit]) -> Result<(), SatError> {
        if let Some(&l) = lits.iter().find(|l| l.var().index() >= self.num_vars) {
            return Err(SatError::LiteralOutOfRange {
                lit: l.to_dimacs(),
                num_vars: self.num_vars as u32,
            });
        }
        self.clauses.push(lits.to_vec());
        Ok(())
    }

    fn solve(&mut self, budget: &Budget, polarity: Polarity) -> SolveOutcome {
        self.stats.solves += 1;
        if budget.is_zero() {
            return SolveOutcome::BudgetExhausted;
        }
        let deadline = budget.time.map(|t| Instant::now() + t);
        let first = polarity == Polarity::PreferTrue;
        let mut assign: Vec<Option<bool>> = vec![None; self.num_vars];
        let mut trail: Vec<usize> = Vec::new();
        // (trail length before decision, decision var, whether the second branch was tried)
        let mut decisions: Vec<(usize, usize, bool)> = Vec::new();
        let mut spent = 0;
        let mut ok = self.propagate(&mut assign, &mut trail);
        loop {
            if !ok {
                self.stats.conflicts += 1;
                spent += 1;
                if budget.conflicts.is_some_and(|m| spent >= m)
                    || deadline.is_some_and(|d| Instant::now() >= d)
                {
                    return SolveOutcome::BudgetExhausted;
                }
                // Backtrack to the latest decision with an untried branch.
                loop {
                    let Some((mark, var, flipped)) = decisions.pop() else {
                        return SolveOutcome::Unsat;
                    };
                    for v in trail.drain(mark..) {
                        assign[v] = None;
                    }
                    if !flipped {
                        assign[var] = Some(!first);
                        trail.push(var);
                        decisions.push((mark, var, true));
                        break;
                    }
                }
                ok = self.propagate(&mut assign, &mut trail);
                continue;
            }
            match assign.iter().position(Option::is_none) {
                None => {
                    return SolveOutcome::Sat(Assignment::from_values(
                        assign.into_iter().map(|v| v.unwrap()).collect(),
                    ))
                }
                Some(var) => {
                    self.stats.decisions += 1;
                    decisions.push((trail.len(), var, false));
                    assign[var] = Some(first);
                    trail.push(var);
                    ok = self.propagate(&mut assign, &mut trail);
                }
            }
        }
    }

    fn stats(&self) -> SolverStats {
        self.stats
    }
}
