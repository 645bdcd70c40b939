//! Deciding whether a single variable is free for negation, that is, 0 in
//! every minimal model.
//!
//! Only flip sets containing `x` are needed: if `x` is free, every model
//! with `x = 1` has a model strictly below it with `x = 0`. So `ω` starts as
//! `φ ∧ x ∧ ¬φ[x↦0]` and each refinement with a set `S ∋ x` conjoins
//! `¬φ[S↦0]`, reusing the clause representatives already in the session.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::{fmt_set, Encoding, EngineError, PolarityPolicy, RunStats};
use crate::formula::{
    clause_definition, smaller_model_constraint, tseitin_negation_cnf, Assignment, Clause,
    CnfFormula, Lit, Partition, Var, VarSet,
};
use crate::sat::{BackendKind, Budget, Meter, SolveOutcome, SolverSession};

#[derive(Clone, Debug)]
pub struct FfnConfig {
    /// Budget for the whole decision.
    pub budget: Budget,
    pub polarity: PolarityPolicy,
    pub encoding: Encoding,
    pub backend: BackendKind,
    pub seed: u64,
    /// Keep a copy of every clause added to `ω`.
    pub record_omega: bool,
    /// Keep the counterexample behind each refinement.
    pub record_trace: bool,
}

impl Default for FfnConfig {
    fn default() -> Self {
        FfnConfig {
            budget: Budget::unlimited(),
            polarity: PolarityPolicy::Heuristic,
            encoding: Encoding::Shared,
            backend: BackendKind::Cdcl,
            seed: 0,
            record_omega: false,
            record_trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FfnOutcome {
    /// False when the budget ran out; `free` is then meaningless.
    pub completed: bool,
    pub free: bool,
    pub stats: RunStats,
    /// Flip sets used for refinement, in order. `{x}` is implicit.
    pub history: Vec<VarSet>,
    /// Counterexample that produced each flip set, when recorded.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<Assignment>,
}

impl FfnOutcome {
    /// `Some(free)` when completed.
    pub fn answer(&self) -> Option<bool> {
        self.completed.then_some(self.free)
    }
}

/// The session holding `ω` together with its representative bookkeeping.
pub struct FfnEngine {
    phi: CnfFormula,
    x: Var,
    cfg: FfnConfig,
    omega: SolverSession,
    /// `φ[x↦0]` and the representative of each of its clauses.
    phi0: CnfFormula,
    base_reps: Vec<Var>,
    rep_map: HashMap<Clause, Var>,
    used: HashSet<VarSet>,
    history: Vec<VarSet>,
    last_falsity: Option<Clause>,
    meter: Meter,
    stats: RunStats,
}

impl FfnEngine {
    pub fn new(phi: &CnfFormula, x: Var, cfg: FfnConfig) -> Result<FfnEngine, EngineError> {
        if x.get() > phi.num_vars() {
            return Err(EngineError::Precondition(format!(
                "variable {x} outside the formula's {} variables",
                phi.num_vars()
            )));
        }
        let mut omega = SolverSession::with_backend(cfg.backend, phi.num_vars(), cfg.seed);
        if cfg.record_omega {
            omega.record_clauses();
        }
        omega.add_all(phi.clauses())?;
        omega.add_clause(&[x.positive()])?;
        let phi0 = phi.substitute_with(|v| (v == x).then_some(false));
        let mut engine = FfnEngine {
            phi: phi.clone(),
            x,
            meter: Meter::new(cfg.budget),
            cfg,
            omega,
            phi0,
            base_reps: Vec::new(),
            rep_map: HashMap::new(),
            used: HashSet::from([VarSet::from([x])]),
            history: Vec::new(),
            last_falsity: None,
            stats: RunStats::default(),
        };
        let phi0 = engine.phi0.clone();
        match engine.cfg.encoding {
            Encoding::Shared => {
                let mut falsity = Vec::with_capacity(phi0.len());
                for c in phi0.clauses() {
                    let r = engine.representative(c)?;
                    engine.base_reps.push(r);
                    falsity.push(r.negative());
                }
                engine.emit_falsity(falsity)?;
            }
            Encoding::Naive => engine.encode_fresh(&phi0)?,
        }
        Ok(engine)
    }

    pub fn variable(&self) -> Var {
        self.x
    }

    pub fn history(&self) -> &[VarSet] {
        &self.history
    }

    /// The most recent clause asserting that some reduced clause is false.
    pub fn last_falsity(&self) -> Option<&Clause> {
        self.last_falsity.as_ref()
    }

    /// Representative of a clause of `φ[x↦0]` or of a reduced clause.
    pub fn representative_of(&self, c: &Clause) -> Option<Var> {
        self.rep_map.get(c).copied()
    }

    pub fn omega_clauses(&self) -> Option<&[Clause]> {
        self.omega.clause_log()
    }

    pub fn omega_num_vars(&self) -> u32 {
        self.omega.num_vars()
    }

    fn representative(&mut self, c: &Clause) -> Result<Var, EngineError> {
        if let Some(&r) = self.rep_map.get(c) {
            return Ok(r);
        }
        let r = self.omega.reserve_fresh(1);
        for d in clause_definition(c, r) {
            self.omega.add(&d)?;
        }
        self.rep_map.insert(c.clone(), r);
        Ok(r)
    }

    fn emit_falsity(&mut self, lits: Vec<Lit>) -> Result<(), EngineError> {
        let c = Clause::new(lits).expect("distinct representatives");
        self.omega.add(&c)?;
        self.last_falsity = Some(c);
        Ok(())
    }

    fn encode_fresh(&mut self, f: &CnfFormula) -> Result<(), EngineError> {
        let neg = tseitin_negation_cnf(f, &mut self.omega);
        self.omega.add_all(&neg.clauses)?;
        self.last_falsity = neg.clauses.last().cloned();
        Ok(())
    }

    /// Conjoins `¬φ[S↦0]` onto `ω`.
    pub fn refine_omega(&mut self, s: &VarSet) -> Result<(), EngineError> {
        if !s.contains(&self.x) {
            return Err(EngineError::Precondition(format!(
                "flip set {} does not contain {}",
                fmt_set(s),
                self.x
            )));
        }
        if self.used.contains(s) {
            return Err(EngineError::DuplicateDescriptor(fmt_set(s)));
        }
        match self.cfg.encoding {
            Encoding::Shared => {
                let phi0 = std::mem::take(&mut self.phi0);
                let result = self.refine_shared(&phi0, s);
                self.phi0 = phi0;
                result?;
            }
            Encoding::Naive => {
                let reduced = self
                    .phi
                    .substitute_with(|v| s.contains(&v).then_some(false));
                self.encode_fresh(&reduced)?;
            }
        }
        self.used.insert(s.clone());
        self.history.push(s.clone());
        Ok(())
    }

    fn refine_shared(&mut self, phi0: &CnfFormula, s: &VarSet) -> Result<(), EngineError> {
        let mut falsity = Vec::new();
        let mut seen = HashSet::new();
        let base_reps = self.base_reps.clone();
        for (c, &base) in phi0.clauses().iter().zip(&base_reps) {
            let touches_pos = c
                .lits()
                .iter()
                .any(|l| l.is_positive() && s.contains(&l.var()));
            let touches_neg = c
                .lits()
                .iter()
                .any(|l| !l.is_positive() && s.contains(&l.var()));
            let r = match (touches_pos, touches_neg) {
                // Satisfied by the substitution.
                (_, true) => continue,
                (false, false) => base,
                (true, false) => {
                    let reduced =
                        Clause::new(c.lits().iter().copied().filter(|l| !s.contains(&l.var())))
                            .expect("subclause of a clause");
                    if reduced.is_empty() {
                        // φ[S↦0] is false, so the refinement is trivially true.
                        let r = self.representative(&reduced)?;
                        self.omega.add_clause(&[r.negative()])?;
                        r
                    } else {
                        self.representative(&reduced)?
                    }
                }
            };
            if seen.insert(r) {
                falsity.push(r.negative());
            }
        }
        self.emit_falsity(falsity)
    }

    fn charge(&mut self, before: u64) {
        self.stats.solver_calls += 1;
        self.stats.conflicts += self.meter.conflicts_used() - before;
    }

    pub fn run(mut self) -> Result<FfnOutcome, EngineError> {
        let started = Instant::now();
        let n = self.phi.num_vars() as usize;
        let all_min = Partition::all_min(n as u32);
        let unlimited = Budget::unlimited();
        let mut trace = Vec::new();
        let answer = loop {
            let before = self.meter.conflicts_used();
            let out = self.omega.solve_metered(
                &mut self.meter,
                &unlimited,
                self.cfg.polarity.counterexample(),
            );
            self.charge(before);
            let nu = match out {
                SolveOutcome::Unsat => break Some(true),
                SolveOutcome::BudgetExhausted => break None,
                SolveOutcome::Sat(m) => m.project(n),
            };

            // φ ∧ ¬x ∧ ⋀_{ν(z)=0} ¬z
            let constraint = smaller_model_constraint(&nu, &all_min, Some(self.x))?;
            let mut witness =
                SolverSession::with_backend(self.cfg.backend, n as u32, self.cfg.seed);
            witness.add_all(self.phi.clauses())?;
            witness.add_all(constraint.clauses())?;
            let before = self.meter.conflicts_used();
            let out =
                witness.solve_metered(&mut self.meter, &unlimited, self.cfg.polarity.witness());
            self.charge(before);
            let smaller = match out {
                SolveOutcome::Unsat => break Some(false),
                SolveOutcome::BudgetExhausted => break None,
                SolveOutcome::Sat(m) => m.project(n),
            };
            check_witness(&nu, &smaller, self.x)?;
            let s: VarSet = nu.ones().filter(|&v| !smaller.get(v)).collect();
            // ν ⊨ φ[S↦0], so the refinement removes ν from ω.
            if !self.phi.evaluate(&nu.overridden(&s, &VarSet::new()))? {
                return Err(EngineError::InvariantViolation(format!(
                    "flip set {} does not exclude {nu:?}",
                    fmt_set(&s)
                )));
            }
            self.refine_omega(&s)?;
            self.stats.iterations += 1;
            if self.cfg.record_trace {
                trace.push(nu);
            }
        };
        self.stats.elapsed = started.elapsed();
        Ok(FfnOutcome {
            completed: answer.is_some(),
            free: answer.unwrap_or(false),
            stats: self.stats,
            history: self.history,
            trace,
        })
    }
}

fn check_witness(nu: &Assignment, smaller: &Assignment, x: Var) -> Result<(), EngineError> {
    let below = nu.vars().all(|v| !smaller.get(v) || nu.get(v));
    if smaller.get(x) || !nu.get(x) || !below {
        return Err(EngineError::InvariantViolation(format!(
            "witness {smaller:?} must lie strictly below {nu:?} with {x} flipped"
        )));
    }
    Ok(())
}

/// Decides whether `x` is 0 in every minimal model of `φ`.
pub fn free_for_negation(
    phi: &CnfFormula,
    x: Var,
    cfg: &FfnConfig,
) -> Result<FfnOutcome, EngineError> {
    FfnEngine::new(phi, x, cfg.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::var_set;
    use crate::sat::{extension_exists, Polarity};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cnf(n: u32, clauses: &[&[i64]]) -> CnfFormula {
        CnfFormula::from_dimacs_clauses(n, clauses).unwrap()
    }

    fn ffn(phi: &CnfFormula, x: u32) -> FfnOutcome {
        free_for_negation(phi, Var::new(x), &FfnConfig::default()).unwrap()
    }

    fn clause(lits: &[i64]) -> Clause {
        Clause::new(lits.iter().map(|&l| Lit::from_dimacs(l))).unwrap()
    }

    #[test]
    fn implication_with_independent_disjunction() {
        // x=1 y=2 w=3 z=4: (¬x ∨ y) ∧ (w ∨ z)
        let phi = cnf(4, &[&[-1, 2], &[3, 4]]);
        let out = ffn(&phi, 2);
        assert_eq!(out.answer(), Some(true));
        assert!(out.history.iter().all(|s| s.contains(&Var::new(2))));
        assert!(out.history.contains(&var_set([1, 2])), "{:?}", out.history);
    }

    #[test]
    fn implication_with_wide_consequent() {
        // x=1 y=2 w1=3 w2=4: ¬x ∨ y ∨ w1 ∨ w2
        let phi = cnf(4, &[&[-1, 2, 3, 4]]);
        let out = ffn(&phi, 2);
        assert_eq!(out.answer(), Some(true));
        assert_eq!(out.history, vec![var_set([1, 2])]);
    }

    #[test]
    fn unit_variable_is_not_free() {
        assert_eq!(ffn(&cnf(1, &[&[1]]), 1).answer(), Some(false));
    }

    #[test]
    fn disjunction_members_are_not_free() {
        let phi = cnf(2, &[&[1, 2]]);
        assert_eq!(ffn(&phi, 1).answer(), Some(false));
        assert_eq!(ffn(&phi, 2).answer(), Some(false));
    }

    #[test]
    fn unconstrained_and_unsat_cases() {
        assert_eq!(ffn(&CnfFormula::new(2), 2).answer(), Some(true));
        assert_eq!(ffn(&cnf(1, &[&[1], &[-1]]), 1).answer(), Some(true));
    }

    #[test]
    fn zero_budget_is_incomplete() {
        let cfg = FfnConfig {
            budget: Budget::conflicts(0),
            ..FfnConfig::default()
        };
        let out = free_for_negation(&cnf(2, &[&[-1, 2]]), Var::new(2), &cfg).unwrap();
        assert_eq!(out.answer(), None);
    }

    #[test]
    fn variable_out_of_range() {
        assert!(free_for_negation(&cnf(1, &[&[1]]), Var::new(2), &FfnConfig::default()).is_err());
    }

    #[test]
    fn refinement_set_algebra() {
        // a=1 b=2 c=3 d=4, x=5 absent so φ[x↦0] = φ.
        let phi = cnf(5, &[&[1, 2], &[-1, 3], &[4]]);
        let mut e = FfnEngine::new(&phi, Var::new(5), FfnConfig::default()).unwrap();
        let rd = e.representative_of(&clause(&[4])).unwrap();
        e.refine_omega(&var_set([1, 5])).unwrap();
        let rb = e.representative_of(&clause(&[2])).unwrap();
        let mut expected = [rd.negative(), rb.negative()];
        expected.sort();
        assert_eq!(e.last_falsity().unwrap().lits(), &expected[..]);
    }

    #[test]
    fn untouched_refinement_reuses_base_falsity() {
        // Variable 5 occurs nowhere.
        let phi = cnf(5, &[&[1, 2], &[-1, 3]]);
        let mut e = FfnEngine::new(&phi, Var::new(4), FfnConfig::default()).unwrap();
        let base = e.last_falsity().unwrap().clone();
        let reps = e.rep_map.len();
        e.refine_omega(&var_set([4, 5])).unwrap();
        assert_eq!(e.last_falsity().unwrap(), &base);
        assert_eq!(e.rep_map.len(), reps);
    }

    #[test]
    fn mixed_polarity_clause_is_dropped() {
        // (a ∨ ¬b) with a,b ∈ S is satisfied by the substitution.
        let phi = cnf(3, &[&[1, -2], &[3]]);
        let mut e = FfnEngine::new(&phi, Var::new(2), FfnConfig::default()).unwrap();
        e.refine_omega(&var_set([1, 2])).unwrap();
        let r3 = e.representative_of(&clause(&[3])).unwrap();
        assert_eq!(e.last_falsity().unwrap().lits(), &[r3.negative()]);
    }

    #[test]
    fn refine_preconditions() {
        let phi = cnf(3, &[&[1, 2, 3]]);
        let mut e = FfnEngine::new(&phi, Var::new(1), FfnConfig::default()).unwrap();
        assert!(matches!(
            e.refine_omega(&var_set([2])),
            Err(EngineError::Precondition(_))
        ));
        assert!(matches!(
            e.refine_omega(&var_set([1])),
            Err(EngineError::DuplicateDescriptor(_))
        ));
        e.refine_omega(&var_set([1, 2])).unwrap();
        assert!(matches!(
            e.refine_omega(&var_set([1, 2])),
            Err(EngineError::DuplicateDescriptor(_))
        ));
    }

    #[test]
    fn overlapping_refinements_share_definitions() {
        let phi = cnf(5, &[&[1, 2, 3], &[1, 2, 4], &[-5, 3]]);
        let mut e = FfnEngine::new(
            &phi,
            Var::new(1),
            FfnConfig {
                record_omega: true,
                ..FfnConfig::default()
            },
        )
        .unwrap();
        e.refine_omega(&var_set([1, 2])).unwrap();
        let size = e.omega_clauses().unwrap().len();
        let reps = e.rep_map.len();
        // The reduced clauses (3), (4) already have representatives.
        e.refine_omega(&var_set([1, 2, 5])).unwrap();
        assert_eq!(e.rep_map.len(), reps);
        assert_eq!(e.omega_clauses().unwrap().len(), size + 1);
    }

    fn random_cnf(rng: &mut ChaCha8Rng, n: u32, m: usize, width: usize) -> CnfFormula {
        let mut f = CnfFormula::new(n);
        for _ in 0..m {
            let k = rng.gen_range(1..=width);
            let lits: Vec<Lit> = (0..k)
                .map(|_| Lit::new(Var::new(rng.gen_range(1..=n)), rng.gen_bool(0.5)))
                .collect();
            f.add_lits(lits).unwrap();
        }
        f
    }

    fn reference(phi: &CnfFormula, x: Var, w: &[VarSet], nu: &Assignment) -> bool {
        nu.get(x)
            && phi.evaluate(nu).unwrap()
            && !phi
                .substitute_with(|v| (v == x).then_some(false))
                .evaluate(nu)
                .unwrap()
            && w.iter().all(|s| {
                !phi.substitute_with(|v| s.contains(&v).then_some(false))
                    .evaluate(nu)
                    .unwrap()
            })
    }

    proptest! {
        #[test]
        fn omega_matches_its_definition(seed in any::<u64>(), naive in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..=6);
            let m = rng.gen_range(1..=3 * n as usize);
            let phi = random_cnf(&mut rng, n, m, 3);
            let x = Var::new(rng.gen_range(1..=n));
            let cfg = FfnConfig {
                record_omega: true,
                encoding: if naive { Encoding::Naive } else { Encoding::Shared },
                ..FfnConfig::default()
            };
            let mut e = FfnEngine::new(&phi, x, cfg).unwrap();
            let mut w = Vec::new();
            for _ in 0..4 {
                let mut s: VarSet = (1..=n).filter(|_| rng.gen_bool(0.4)).map(Var::new).collect();
                s.insert(x);
                if e.refine_omega(&s).is_ok() {
                    w.push(s);
                }
                for bits in 0..1u64 << n {
                    let nu = Assignment::from_bits(n as usize, bits);
                    prop_assert_eq!(
                        extension_exists(e.omega_clauses().unwrap(), e.omega_num_vars(), &nu),
                        reference(&phi, x, &w, &nu),
                        "{:?} after {:?}", nu, w
                    );
                }
            }
        }

        #[test]
        fn configurations_agree(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..=8);
            let m = rng.gen_range(1..=3 * n as usize);
            let phi = random_cnf(&mut rng, n, m, 3);
            let x = Var::new(rng.gen_range(1..=n));
            let base = ffn(&phi, x.get()).answer();
            prop_assert!(base.is_some());
            for encoding in [Encoding::Shared, Encoding::Naive] {
                for polarity in [Polarity::PreferFalse, Polarity::PreferTrue, Polarity::Default] {
                    for backend in [BackendKind::Cdcl, BackendKind::Backtrack] {
                        let cfg = FfnConfig {
                            encoding,
                            polarity: PolarityPolicy::Fixed(polarity),
                            backend,
                            ..FfnConfig::default()
                        };
                        prop_assert_eq!(free_for_negation(&phi, x, &cfg).unwrap().answer(), base);
                    }
                }
            }
        }
    }
}
