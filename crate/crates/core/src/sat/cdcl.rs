//! Conflict-driven clause learning solver.
//!
//! - two watched literals with blocker literals
//! - first-UIP learning with local clause minimization
//! - VSIDS decisions over an activity heap
//! - Luby restarts and activity-based learnt clause reduction
//!
//! Between calls the solver sits at decision level 0, so clauses and
//! variables can be added at any time.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::heap::VarHeap;
use super::{Budget, Polarity, SatBackend, SatError, SolveOutcome, SolverStats};
use crate::formula::{Assignment, Lit, Var};

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

type ClauseRef = usize;

#[derive(Clone, Copy, Debug)]
struct Watch {
    cref: ClauseRef,
    blocker: Lit,
}

#[derive(Clone, Debug)]
struct StoredClause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

pub struct CdclSolver {
    num_vars: usize,
    clauses: Vec<StoredClause>,
    learnts: usize,
    /// Indexed by literal code; holds clauses watching the complement.
    watches: Vec<Vec<Watch>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<ClauseRef>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    clause_inc: f64,
    order: VarHeap,
    saved_phase: Vec<bool>,
    seen: Vec<bool>,
    max_learnts: f64,
    /// False once the clause store is unsatisfiable at level 0.
    ok: bool,
    rng: ChaCha8Rng,
    stats: SolverStats,
}

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f64 = 0.999;
const RESTART_FIRST: f64 = 100.0;

fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq)
}

enum Search {
    Sat,
    Unsat,
    Restart,
    Exhausted,
}

impl CdclSolver {
    pub fn new(num_vars: u32, seed: u64) -> CdclSolver {
        let mut s = CdclSolver {
            num_vars: 0,
            clauses: Vec::new(),
            learnts: 0,
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            clause_inc: 1.0,
            order: VarHeap::default(),
            saved_phase: Vec::new(),
            seen: Vec::new(),
            max_learnts: 0.0,
            ok: true,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stats: SolverStats::default(),
        };
        s.grow(num_vars as usize);
        s
    }

    fn grow(&mut self, n: usize) {
        if n <= self.num_vars {
            return;
        }
        let old = self.num_vars;
        self.num_vars = n;
        self.watches.resize_with(2 * n, Vec::new);
        self.assigns.resize(n, UNDEF);
        self.level.resize(n, 0);
        self.reason.resize(n, None);
        self.saved_phase.resize(n, false);
        self.seen.resize(n, false);
        self.order.grow(n);
        for _ in old..n {
            // Small seeded jitter breaks ties between untouched variables.
            let jitter = self.rng.gen::<f64>() * 1e-6;
            self.activity.push(jitter);
        }
        for v in old..n {
            self.order.insert(v, &self.activity);
        }
    }

    #[inline]
    fn value(&self, l: Lit) -> i8 {
        let v = self.assigns[l.var().index()];
        if l.is_positive() {
            v
        } else {
            -v
        }
    }

    #[inline]
    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<ClauseRef>) {
        let v = l.var().index();
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = if l.is_positive() { TRUE } else { FALSE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn attach(&mut self, cref: ClauseRef) {
        let c = &self.clauses[cref].lits;
        let (a, b) = (c[0], c[1]);
        self.watches[(!a).code()].push(Watch { cref, blocker: b });
        self.watches[(!b).code()].push(Watch { cref, blocker: a });
    }

    fn propagate(&mut self) -> Option<ClauseRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.clauses[w.cref].deleted {
                    continue;
                }
                if self.value(w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let lits = &mut self.clauses[w.cref].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                let watch = Watch {
                    cref: w.cref,
                    blocker: first,
                };
                if first != w.blocker && self.value(first) == TRUE {
                    ws[j] = watch;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                let len = self.clauses[w.cref].lits.len();
                for k in 2..len {
                    let l = self.clauses[w.cref].lits[k];
                    if self.value(l) != FALSE {
                        let lits = &mut self.clauses[w.cref].lits;
                        lits.swap(1, k);
                        self.watches[(!l).code()].push(watch);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = watch;
                j += 1;
                if self.value(first) == FALSE {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: ClauseRef) {
        let c = &mut self.clauses[cref];
        c.activity += self.clause_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    /// First-UIP analysis. Returns the learnt clause (asserting literal
    /// first) and the backjump level.
    fn analyze(&mut self, mut confl: ClauseRef) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit::from_code(0)];
        let mut path = 0;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        loop {
            if self.clauses[confl].learnt {
                self.bump_clause(confl);
            }
            let start = usize::from(p.is_some());
            let len = self.clauses[confl].lits.len();
            for k in start..len {
                let q = self.clauses[confl].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let lit = self.trail[index];
            let v = lit.var().index();
            self.seen[v] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reason[v].expect("implied literal at conflict level has a reason");
        }
        learnt[0] = !p.unwrap();

        // Local minimization: drop literals implied by other learnt literals.
        let full = learnt.clone();
        let mut keep = vec![learnt[0]];
        for &l in &learnt[1..] {
            let v = l.var().index();
            let redundant = match self.reason[v] {
                None => false,
                Some(r) => self.clauses[r].lits[1..].iter().all(|q| {
                    let u = q.var().index();
                    self.seen[u] || self.level[u] == 0
                }),
            };
            if !redundant {
                keep.push(l);
            }
        }
        for l in &full[1..] {
            self.seen[l.var().index()] = false;
        }
        learnt = keep;

        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[max_i].var().index()] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[learnt[1].var().index()];
        }
        (learnt, bt)
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var().index();
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.saved_phase[v] = l.is_positive();
            self.order.insert(v, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = self.trail.len();
    }

    fn locked(&self, cref: ClauseRef) -> bool {
        let l = self.clauses[cref].lits[0];
        self.value(l) == TRUE && self.reason[l.var().index()] == Some(cref)
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<ClauseRef> = (0..self.clauses.len())
            .filter(|&i| {
                let c = &self.clauses[i];
                c.learnt && !c.deleted && c.lits.len() > 2
            })
            .collect();
        cands.sort_by(|&a, &b| {
            self.clauses[a]
                .activity
                .total_cmp(&self.clauses[b].activity)
        });
        let half = cands.len() / 2;
        for &cref in &cands[..half] {
            if !self.locked(cref) {
                let c = &mut self.clauses[cref];
                c.deleted = true;
                c.lits = Vec::new();
                self.learnts -= 1;
            }
        }
    }

    fn pick_branch(&mut self, polarity: Polarity) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                let phase = match polarity {
                    Polarity::PreferFalse => false,
                    Polarity::PreferTrue => true,
                    Polarity::Default => self.saved_phase[v],
                };
                return Some(Lit::new(Var::from_index(v), phase));
            }
        }
        None
    }

    fn search(
        &mut self,
        conflict_limit: f64,
        polarity: Polarity,
        spent: &mut u64,
        max_conflicts: Option<u64>,
        deadline: Option<Instant>,
    ) -> Search {
        let mut conflicts_here = 0.0;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                *spent += 1;
                conflicts_here += 1.0;
                if self.decision_level() == 0 {
                    return Search::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let cref = self.clauses.len();
                    let asserting = learnt[0];
                    self.clauses.push(StoredClause {
                        lits: learnt,
                        learnt: true,
                        deleted: false,
                        activity: 0.0,
                    });
                    self.learnts += 1;
                    self.attach(cref);
                    self.bump_clause(cref);
                    self.enqueue(asserting, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                self.clause_inc /= CLAUSE_DECAY;
                if max_conflicts.is_some_and(|m| *spent >= m) {
                    return Search::Exhausted;
                }
                if deadline.is_some_and(|d| Instant::now() >= d) {
                    return Search::Exhausted;
                }
            } else {
                if conflicts_here >= conflict_limit {
                    return Search::Restart;
                }
                if self.learnts as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                }
                match self.pick_branch(polarity) {
                    None => return Search::Sat,
                    Some(l) => {
                        self.stats.decisions += 1;
                        if self.stats.decisions.is_multiple_of(256)
                            && deadline.is_some_and(|d| Instant::now() >= d)
                        {
                            return Search::Exhausted;
                        }
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, None);
                    }
                }
            }
        }
    }
}

impl SatBackend for CdclSolver {
    fn num_vars(&self) -> u32 {
        self.num_vars as u32
    }

    fn reserve_fresh(&mut self, n: u32) -> Var {
        let first = Var::from_index(self.num_vars);
        self.grow(self.num_vars + n as usize);
        first
    }

    fn add_clause(&mut self, lits: &[Lit]) -> Result<(), SatError> {
        if let Some(&l) = lits.iter().find(|l| l.var().index() >= self.num_vars) {
            return Err(SatError::LiteralOutOfRange {
                lit: l.to_dimacs(),
                num_vars: self.num_vars as u32,
            });
        }
        if !self.ok {
            return Ok(());
        }
        debug_assert_eq!(self.decision_level(), 0);
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return Ok(());
        }
        if c.iter().any(|&l| self.value(l) == TRUE) {
            return Ok(());
        }
        c.retain(|&l| self.value(l) != FALSE);
        match c.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                let cref = self.clauses.len();
                self.clauses.push(StoredClause {
                    lits: c,
                    learnt: false,
                    deleted: false,
                    activity: 0.0,
                });
                self.attach(cref);
            }
        }
        Ok(())
    }

    fn solve(&mut self, budget: &Budget, polarity: Polarity) -> SolveOutcome {
        self.stats.solves += 1;
        if !self.ok {
            return SolveOutcome::Unsat;
        }
        if budget.is_zero() {
            return SolveOutcome::BudgetExhausted;
        }
        let deadline = budget.time.map(|t| Instant::now() + t);
        if self.propagate().is_some() {
            self.ok = false;
            return SolveOutcome::Unsat;
        }
        let originals = self.clauses.len() - self.learnts;
        self.max_learnts = self.max_learnts.max(originals as f64 / 3.0 + 1000.0);
        let mut spent = 0u64;
        let mut restarts = 0u64;
        let outcome = loop {
            let limit = luby(2.0, restarts) * RESTART_FIRST;
            match self.search(limit, polarity, &mut spent, budget.conflicts, deadline) {
                Search::Sat => {
                    let model =
                        Assignment::from_values(self.assigns.iter().map(|&v| v == TRUE).collect());
                    break SolveOutcome::Sat(model);
                }
                Search::Unsat => {
                    self.ok = false;
                    break SolveOutcome::Unsat;
                }
                Search::Exhausted => break SolveOutcome::BudgetExhausted,
                Search::Restart => {
                    restarts += 1;
                    self.stats.restarts += 1;
                    self.max_learnts *= 1.05;
                    self.cancel_until(0);
                }
            }
        };
        self.cancel_until(0);
        outcome
    }

    fn stats(&self) -> SolverStats {
        self.stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luby_sequence() {
        let seq: Vec<f64> = (0..15).map(|i| luby(2.0, i)).collect();
        assert_eq!(
            seq,
            vec![1., 1., 2., 1., 1., 2., 4., 1., 1., 2., 1., 1., 2., 4., 8.]
        );
    }

    #[test]
    fn learns_across_calls() {
        let mut s = CdclSolver::new(3, 0);
        for c in [[1i64, 2], [-1, 2], [1, -2]] {
            s.add_clause(&c.map(Lit::from_dimacs)).unwrap();
        }
        match s.solve(&Budget::unlimited(), Polarity::PreferFalse) {
            SolveOutcome::Sat(m) => {
                assert!(m.get(Var::new(1)) && m.get(Var::new(2)));
            }
            o => panic!("{o:?}"),
        }
        s.add_clause(&[Lit::from_dimacs(-1), Lit::from_dimacs(-2)])
            .unwrap();
        assert_eq!(
            s.solve(&Budget::unlimited(), Polarity::Default),
            SolveOutcome::Unsat
        );
    }
}
