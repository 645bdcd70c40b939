//! Entailment under minimal models by counterexample-guided abstraction
//! refinement.
//!
//! The engine proves that every model of `φ ∧ ¬ψ` has a strictly smaller
//! model of `φ`. It keeps `ω`, the negation of the current abstraction, in
//! an incremental session. Each model `ν` of `ω` is a counterexample: either
//! no model of `φ` lies strictly below it, in which case `ν` is a minimal
//! model violating `ψ`, or some `ν′` does and the flip that maps `ν` onto
//! `ν′` is added to the abstraction. `ω` then gains
//! `¬φ[S↦0, Z0↦0, Z1↦1] ∨ ⋀_{x∈S} ¬x`, which `ν` violates, so no flip is
//! ever derived twice and the loop terminates.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::{fmt_set, Encoding, EngineError, PolarityPolicy, RunStats};
use crate::formula::{
    smaller_model_constraint, tseitin_negation_expr, Assignment, BoolExpr, Clause, CnfFormula, Lit,
    Partition, Role, Var, VarSet,
};
use crate::sat::{BackendKind, Budget, Meter, Polarity, SolveOutcome, SolverSession};

/// The variables a refinement flips: minimized variables flipped 1→0 and
/// varying variables flipped to 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlipDescriptor {
    /// `S ⊆ P`, never empty.
    pub to_zero: VarSet,
    /// `Z0 ⊆ Z`.
    pub varying_to_zero: VarSet,
    /// `Z1 ⊆ Z`.
    pub varying_to_one: VarSet,
}

impl FlipDescriptor {
    /// A descriptor for the plain ordering.
    pub fn plain(to_zero: VarSet) -> FlipDescriptor {
        FlipDescriptor {
            to_zero,
            varying_to_zero: VarSet::new(),
            varying_to_one: VarSet::new(),
        }
    }

    /// `φ[S↦0, Z0↦0, Z1↦1]`.
    pub fn reduce(&self, phi: &CnfFormula) -> CnfFormula {
        phi.substitute_with(|v| {
            if self.to_zero.contains(&v) || self.varying_to_zero.contains(&v) {
                Some(false)
            } else if self.varying_to_one.contains(&v) {
                Some(true)
            } else {
                None
            }
        })
    }

    /// The assignment obtained from `nu` by performing the flip.
    pub fn apply(&self, nu: &Assignment) -> Assignment {
        let mut a = nu.clone();
        for &v in self.to_zero.iter().chain(&self.varying_to_zero) {
            a.set(v, false);
        }
        for &v in &self.varying_to_one {
            a.set(v, true);
        }
        a
    }

    /// Whether the abstraction disjunct for this descriptor holds at `nu`:
    /// `nu ⊨ φ[d]` and some variable of `S` is 1 in `nu`. A refinement with
    /// this descriptor excludes exactly such assignments from `ω`.
    pub fn covers(&self, phi: &CnfFormula, nu: &Assignment) -> bool {
        self.to_zero.iter().any(|&v| nu.get(v)) && phi.evaluate(&self.apply(nu)).unwrap_or(false)
    }

    fn check(&self) -> Result<(), EngineError> {
        if self.to_zero.is_empty() {
            return Err(EngineError::InvariantViolation(
                "flip descriptor with empty S".into(),
            ));
        }
        let overlap = self
            .varying_to_zero
            .intersection(&self.varying_to_one)
            .next()
            .is_some()
            || self
                .to_zero
                .iter()
                .any(|v| self.varying_to_zero.contains(v) || self.varying_to_one.contains(v));
        if overlap {
            return Err(EngineError::InvariantViolation(format!(
                "overlapping flip sets in {self}"
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for FlipDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.varying_to_zero.is_empty() && self.varying_to_one.is_empty() {
            write!(f, "{}", fmt_set(&self.to_zero))
        } else {
            write!(
                f,
                "({}, {}, {})",
                fmt_set(&self.to_zero),
                fmt_set(&self.varying_to_zero),
                fmt_set(&self.varying_to_one)
            )
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// `ψ` holds in every minimal model; the abstraction is the certificate.
    Entailed { certificate: Vec<FlipDescriptor> },
    /// A minimal model of `φ` that falsifies `ψ`.
    NotEntailed { witness: Assignment },
    /// Budget ran out before a decision.
    Exhausted { partial: Vec<FlipDescriptor> },
}

impl Verdict {
    pub fn is_entailed(&self) -> bool {
        matches!(self, Verdict::Entailed { .. })
    }

    pub fn is_not_entailed(&self) -> bool {
        matches!(self, Verdict::NotEntailed { .. })
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self, Verdict::Exhausted { .. })
    }

    /// `Some(true)` for entailed, `Some(false)` for not entailed.
    pub fn decided(&self) -> Option<bool> {
        match self {
            Verdict::Entailed { .. } => Some(true),
            Verdict::NotEntailed { .. } => Some(false),
            Verdict::Exhausted { .. } => None,
        }
    }
}

/// One refinement step: the counterexample, the smaller model found below
/// it and the descriptor derived from the pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refinement {
    pub counterexample: Assignment,
    pub smaller: Assignment,
    pub descriptor: FlipDescriptor,
}

#[derive(Clone, Debug)]
pub struct EntailsReport {
    pub verdict: Verdict,
    pub stats: RunStats,
    /// `φ` has no models at all, so everything is entailed.
    pub vacuous: bool,
    /// Variables of the combined universe of `φ` and `ψ`.
    pub universe: u32,
    /// Empty unless [`EntailsConfig::record_trace`] is set.
    pub trace: Vec<Refinement>,
}

#[derive(Clone, Debug)]
pub struct EntailsConfig {
    /// Applied to each solver call.
    pub call_budget: Budget,
    /// Applied to the whole run.
    pub total_budget: Budget,
    pub max_iterations: Option<u64>,
    pub polarity: PolarityPolicy,
    pub encoding: Encoding,
    pub backend: BackendKind,
    pub seed: u64,
    /// Keep a copy of every clause added to `ω`.
    pub record_omega: bool,
    pub record_trace: bool,
}

impl Default for EntailsConfig {
    fn default() -> Self {
        EntailsConfig {
            call_budget: Budget::unlimited(),
            total_budget: Budget::unlimited(),
            max_iterations: None,
            polarity: PolarityPolicy::Heuristic,
            encoding: Encoding::Shared,
            backend: BackendKind::Cdcl,
            seed: 0,
            record_omega: false,
            record_trace: false,
        }
    }
}

/// Marker for a search that ran out of budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BudgetExhausted;

/// `S`, `Z0` and `Z1` read off the difference between `nu` and a model
/// `smaller` strictly below it.
pub fn derive_descriptor(
    nu: &Assignment,
    smaller: &Assignment,
    part: &Partition,
) -> Result<FlipDescriptor, EngineError> {
    if nu.len() != smaller.len() || !part.less(smaller, nu) {
        return Err(EngineError::Precondition(format!(
            "{smaller:?} is not strictly below {nu:?} in the partition order"
        )));
    }
    let mut d = FlipDescriptor::plain(VarSet::new());
    for v in nu.vars() {
        let (before, after) = (nu.get(v), smaller.get(v));
        match (part.role(v), before, after) {
            (Role::Min, true, false) => {
                d.to_zero.insert(v);
            }
            (Role::Varying, true, false) => {
                d.varying_to_zero.insert(v);
            }
            (Role::Varying, false, true) => {
                d.varying_to_one.insert(v);
            }
            _ => {}
        }
    }
    d.check()?;
    Ok(d)
}

struct SmallerSearch<'a> {
    phi: &'a CnfFormula,
    part: &'a Partition,
    backend: BackendKind,
    seed: u64,
}

impl SmallerSearch<'_> {
    fn run(
        &self,
        nu: &Assignment,
        meter: &mut Meter,
        per_call: &Budget,
        polarity: Polarity,
        stats: &mut RunStats,
    ) -> Result<Result<Option<Assignment>, BudgetExhausted>, EngineError> {
        let constraint = smaller_model_constraint(nu, self.part, None)?;
        let n = nu.len() as u32;
        let mut s = SolverSession::with_backend(self.backend, n, self.seed);
        s.add_all(self.phi.clauses())?;
        s.add_all(constraint.clauses())?;
        let before = meter.conflicts_used();
        let out = s.solve_metered(meter, per_call, polarity);
        stats.solver_calls += 1;
        stats.conflicts += meter.conflicts_used() - before;
        Ok(match out {
            SolveOutcome::Sat(m) => Ok(Some(m.project(n as usize))),
            SolveOutcome::Unsat => Ok(None),
            SolveOutcome::BudgetExhausted => Err(BudgetExhausted),
        })
    }
}

/// Looks for a model of `φ` strictly below `nu` in the `(P,Z)` ordering.
/// Prefers 1 on decisions so the returned model stays close to `nu`.
pub fn find_smaller_model(
    phi: &CnfFormula,
    nu: &Assignment,
    part: &Partition,
    budget: &Budget,
) -> Result<Result<Option<Assignment>, BudgetExhausted>, EngineError> {
    if !phi.evaluate(nu)? {
        return Err(EngineError::Precondition(format!(
            "{nu:?} is not a model of the formula"
        )));
    }
    let universe = phi.num_vars().max(nu.len() as u32).max(part.len() as u32);
    if nu.len() as u32 != universe {
        return Err(EngineError::Precondition(format!(
            "assignment covers {} variables, expected {universe}",
            nu.len()
        )));
    }
    let part = part.extended(universe);
    let phi = phi.extended(universe);
    let search = SmallerSearch {
        phi: &phi,
        part: &part,
        backend: BackendKind::Cdcl,
        seed: 0,
    };
    let mut meter = Meter::new(*budget);
    search.run(
        nu,
        &mut meter,
        &Budget::unlimited(),
        Polarity::PreferTrue,
        &mut RunStats::default(),
    )
}

/// State of one entailment query.
pub struct EntailsEngine {
    phi: CnfFormula,
    psi: BoolExpr,
    part: Partition,
    universe: u32,
    cfg: EntailsConfig,
    omega: SolverSession,
    reps: HashMap<Clause, Var>,
    abstraction: Vec<FlipDescriptor>,
    used: HashSet<FlipDescriptor>,
    meter: Meter,
    stats: RunStats,
    trace: Vec<Refinement>,
    started: Instant,
}

impl EntailsEngine {
    /// Sets up `ω = φ ∧ ¬ψ` over the combined universe of `φ`, `ψ` and the
    /// partition; variables the partition does not list are minimized.
    pub fn new(
        phi: &CnfFormula,
        psi: &BoolExpr,
        part: &Partition,
        cfg: EntailsConfig,
    ) -> Result<Self, EngineError> {
        let universe = phi.num_vars().max(psi.max_var()).max(part.len() as u32);
        let phi = phi.extended(universe);
        let part = part.extended(universe);
        let mut omega = SolverSession::with_backend(cfg.backend, universe, cfg.seed);
        if cfg.record_omega {
            omega.record_clauses();
        }
        omega.add_all(phi.clauses())?;
        let neg = tseitin_negation_expr(psi, &mut omega);
        omega.add_all(&neg.clauses)?;
        Ok(EntailsEngine {
            phi,
            psi: psi.clone(),
            part,
            universe,
            meter: Meter::new(cfg.total_budget),
            cfg,
            omega,
            reps: HashMap::new(),
            abstraction: Vec::new(),
            used: HashSet::new(),
            stats: RunStats::default(),
            trace: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.phi
    }

    pub fn abstraction(&self) -> &[FlipDescriptor] {
        &self.abstraction
    }

    /// Clauses of `ω` when recording is enabled.
    pub fn omega_clauses(&self) -> Option<&[Clause]> {
        self.omega.clause_log()
    }

    pub fn omega_num_vars(&self) -> u32 {
        self.omega.num_vars()
    }

    fn representative(&mut self, c: &Clause) -> Result<Var, EngineError> {
        if self.cfg.encoding == Encoding::Shared {
            if let Some(&r) = self.reps.get(c) {
                return Ok(r);
            }
        }
        let r = self.omega.reserve_fresh(1);
        // Only `c → r` is needed: `¬r` then forces `c` false.
        for &l in c.lits() {
            self.omega.add_clause(&[!l, r.positive()])?;
        }
        if c.is_empty() {
            self.omega.add_clause(&[r.negative()])?;
        }
        if self.cfg.encoding == Encoding::Shared {
            self.reps.insert(c.clone(), r);
        }
        Ok(r)
    }

    /// Weakens the abstraction with `d`: conjoins
    /// `¬φ[S↦0, Z0↦0, Z1↦1] ∨ ⋀_{x∈S} ¬x` onto `ω`.
    pub fn refine(&mut self, d: FlipDescriptor) -> Result<(), EngineError> {
        d.check()?;
        if self.used.contains(&d) {
            return Err(EngineError::DuplicateDescriptor(d.to_string()));
        }
        let reduced = d.reduce(&self.phi);
        let mut disjunction: Vec<Lit> = Vec::with_capacity(reduced.len() + 1);
        for c in reduced.clauses() {
            disjunction.push(self.representative(c)?.negative());
        }
        let selector = self.omega.reserve_fresh(1);
        for &x in &d.to_zero {
            self.omega
                .add_clause(&[selector.negative(), x.negative()])?;
        }
        disjunction.push(selector.positive());
        self.omega.add_clause(&disjunction)?;
        self.used.insert(d.clone());
        self.abstraction.push(d);
        Ok(())
    }

    fn finish(&mut self, verdict: Verdict, vacuous: bool) -> EntailsReport {
        self.stats.elapsed = self.started.elapsed();
        EntailsReport {
            verdict,
            stats: self.stats,
            vacuous,
            universe: self.universe,
            trace: std::mem::take(&mut self.trace),
        }
    }

    fn exhausted(&mut self) -> EntailsReport {
        let partial = self.abstraction.clone();
        self.finish(Verdict::Exhausted { partial }, false)
    }

    /// Whether `φ` alone is unsatisfiable; `None` if undecided in budget.
    fn formula_unsat(&mut self) -> Result<Option<bool>, EngineError> {
        let mut s = SolverSession::with_backend(self.cfg.backend, self.universe, self.cfg.seed);
        s.add_all(self.phi.clauses())?;
        let before = self.meter.conflicts_used();
        let out = s.solve_metered(&mut self.meter, &self.cfg.call_budget, Polarity::Default);
        self.stats.solver_calls += 1;
        self.stats.conflicts += self.meter.conflicts_used() - before;
        Ok(match out {
            SolveOutcome::Unsat => Some(true),
            SolveOutcome::Sat(_) => Some(false),
            SolveOutcome::BudgetExhausted => None,
        })
    }

    pub fn run(mut self) -> Result<EntailsReport, EngineError> {
        let n = self.universe as usize;
        loop {
            if self
                .cfg
                .max_iterations
                .is_some_and(|m| self.stats.iterations >= m)
            {
                return Ok(self.exhausted());
            }
            let before = self.meter.conflicts_used();
            let out = self.omega.solve_metered(
                &mut self.meter,
                &self.cfg.call_budget,
                self.cfg.polarity.counterexample(),
            );
            self.stats.solver_calls += 1;
            self.stats.conflicts += self.meter.conflicts_used() - before;
            let nu = match out {
                SolveOutcome::Unsat => {
                    let certificate = self.abstraction.clone();
                    let vacuous = self.stats.iterations == 0 && self.formula_unsat()? == Some(true);
                    return Ok(self.finish(Verdict::Entailed { certificate }, vacuous));
                }
                SolveOutcome::BudgetExhausted => return Ok(self.exhausted()),
                SolveOutcome::Sat(m) => m.project(n),
            };

            let search = SmallerSearch {
                phi: &self.phi,
                part: &self.part,
                backend: self.cfg.backend,
                seed: self.cfg.seed,
            };
            let found = search.run(
                &nu,
                &mut self.meter,
                &self.cfg.call_budget,
                self.cfg.polarity.witness(),
                &mut self.stats,
            )?;
            let smaller = match found {
                Err(BudgetExhausted) => return Ok(self.exhausted()),
                Ok(None) => {
                    if !self.phi.evaluate(&nu)? || self.psi.evaluate(&nu)? {
                        return Err(EngineError::InvariantViolation(format!(
                            "counterexample {nu:?} must satisfy the formula and falsify the query"
                        )));
                    }
                    return Ok(self.finish(Verdict::NotEntailed { witness: nu }, false));
                }
                Ok(Some(m)) => m,
            };

            let d = derive_descriptor(&nu, &smaller, &self.part)?;
            if !d.covers(&self.phi, &nu) {
                return Err(EngineError::InvariantViolation(format!(
                    "descriptor {d} does not exclude its counterexample {nu:?}"
                )));
            }
            self.refine(d.clone())?;
            self.stats.iterations += 1;
            if self.cfg.record_trace {
                self.trace.push(Refinement {
                    counterexample: nu,
                    smaller,
                    descriptor: d,
                });
            }
        }
    }
}

/// Decides whether `ψ` holds in every `(P,Z)`-minimal model of `φ`.
pub fn entails_min(
    phi: &CnfFormula,
    psi: &BoolExpr,
    part: &Partition,
    cfg: &EntailsConfig,
) -> Result<EntailsReport, EngineError> {
    EntailsEngine::new(phi, psi, part, cfg.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_query, var_set};
    use crate::sat::extension_exists;

    fn cnf(n: u32, clauses: &[&[i64]]) -> CnfFormula {
        CnfFormula::from_dimacs_clauses(n, clauses).unwrap()
    }

    fn a(s: &str) -> Assignment {
        Assignment::from_str01(s)
    }

    fn traced() -> EntailsConfig {
        EntailsConfig {
            record_trace: true,
            ..EntailsConfig::default()
        }
    }

    #[test]
    fn implication_entails_negated_consequent() {
        // x=1, y=2: (¬x ∨ y) ⊨min ¬y
        let phi = cnf(2, &[&[-1, 2]]);
        let r = entails_min(
            &phi,
            &parse_query("!2").unwrap(),
            &Partition::all_min(2),
            &traced(),
        )
        .unwrap();
        match &r.verdict {
            Verdict::Entailed { certificate } => {
                assert!(!certificate.is_empty());
                // y can only be refuted by a flip that lowers it.
                assert!(certificate.iter().any(|d| d.to_zero.contains(&Var::new(2))));
            }
            v => panic!("{v:?}"),
        }
        assert!(!r.vacuous);
    }

    #[test]
    fn at_most_one_of_three() {
        let phi = cnf(3, &[&[-1, -2, -3]]);
        let psi = parse_query("(-1|-2)&(-1|-3)&(-3|-2)").unwrap();
        let r = entails_min(&phi, &psi, &Partition::all_min(3), &traced()).unwrap();
        assert!(r.verdict.is_entailed());
    }

    #[test]
    fn disjunction_does_not_entail() {
        let phi = cnf(2, &[&[1, 2]]);
        let r = entails_min(
            &phi,
            &parse_query("!2").unwrap(),
            &Partition::all_min(2),
            &traced(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::NotEntailed { witness: a("01") });
    }

    #[test]
    fn varying_variable_absorbs_disjunction() {
        // (p ∨ z), P={p}, Z={z}: the only minimal model is {p⁰, z¹}.
        let phi = cnf(2, &[&[1, 2]]);
        let part = Partition::from_sets(2, &var_set([1]), &VarSet::new(), &var_set([2])).unwrap();
        let r = entails_min(&phi, &parse_query("!1").unwrap(), &part, &traced()).unwrap();
        assert!(r.verdict.is_entailed());
        for step in &r.trace {
            assert!(step.descriptor.to_zero.contains(&Var::new(1)));
        }
    }

    #[test]
    fn fixed_variable_keeps_model_minimal() {
        // (p ∨ q), P={p}, Q={q}: {p¹, q⁰} is minimal.
        let phi = cnf(2, &[&[1, 2]]);
        let part = Partition::from_sets(2, &var_set([1]), &var_set([2]), &VarSet::new()).unwrap();
        let r = entails_min(&phi, &parse_query("!1").unwrap(), &part, &traced()).unwrap();
        assert_eq!(r.verdict, Verdict::NotEntailed { witness: a("10") });
    }

    #[test]
    fn unsatisfiable_formula_is_vacuous() {
        let phi = cnf(1, &[&[1], &[-1]]);
        let r = entails_min(
            &phi,
            &parse_query("F").unwrap(),
            &Partition::all_min(1),
            &traced(),
        )
        .unwrap();
        assert!(r.verdict.is_entailed());
        assert!(r.vacuous);
    }

    #[test]
    fn true_query_needs_no_refinement() {
        let phi = cnf(2, &[&[1, 2]]);
        let r = entails_min(
            &phi,
            &BoolExpr::Const(true),
            &Partition::all_min(2),
            &traced(),
        )
        .unwrap();
        assert_eq!(
            r.verdict,
            Verdict::Entailed {
                certificate: vec![]
            }
        );
        assert_eq!(r.stats.iterations, 0);
        assert!(!r.vacuous);
    }

    #[test]
    fn query_variables_extend_universe() {
        // Variable 3 is unconstrained, so it is 0 in every minimal model.
        let phi = cnf(2, &[&[1, 2]]);
        let r = entails_min(
            &phi,
            &parse_query("!3").unwrap(),
            &Partition::all_min(2),
            &traced(),
        )
        .unwrap();
        assert!(r.verdict.is_entailed());
        assert_eq!(r.universe, 3);
    }

    #[test]
    fn zero_budget_is_exhausted() {
        let phi = cnf(2, &[&[1, 2]]);
        let cfg = EntailsConfig {
            total_budget: Budget::conflicts(0),
            ..EntailsConfig::default()
        };
        let r = entails_min(
            &phi,
            &parse_query("!2").unwrap(),
            &Partition::all_min(2),
            &cfg,
        )
        .unwrap();
        assert!(r.verdict.is_exhausted());
    }

    #[test]
    fn smaller_model_examples() {
        let phi = cnf(2, &[&[-1, 2]]);
        let all = Partition::all_min(2);
        let found = find_smaller_model(&phi, &a("11"), &all, &Budget::unlimited())
            .unwrap()
            .unwrap()
            .unwrap();
        assert!(found == a("00") || found == a("01"));
        let phi1 = cnf(1, &[&[1]]);
        assert_eq!(
            find_smaller_model(&phi1, &a("1"), &Partition::all_min(1), &Budget::unlimited())
                .unwrap(),
            Ok(None)
        );
        let pq = cnf(2, &[&[1, 2]]);
        let part = Partition::from_sets(2, &var_set([1]), &var_set([2]), &VarSet::new()).unwrap();
        assert_eq!(
            find_smaller_model(&pq, &a("11"), &part, &Budget::unlimited()).unwrap(),
            Ok(Some(a("01")))
        );
        assert!(find_smaller_model(&phi, &a("10"), &all, &Budget::unlimited()).is_err());
    }

    #[test]
    fn descriptor_examples() {
        let all = Partition::all_min(2);
        assert_eq!(
            derive_descriptor(&a("11"), &a("00"), &all).unwrap(),
            FlipDescriptor::plain(var_set([1, 2]))
        );
        let part = Partition::from_sets(2, &var_set([1]), &VarSet::new(), &var_set([2])).unwrap();
        let d = derive_descriptor(&a("10"), &a("01"), &part).unwrap();
        assert_eq!(d.to_zero, var_set([1]));
        assert!(d.varying_to_zero.is_empty());
        assert_eq!(d.varying_to_one, var_set([2]));
        assert_eq!(d.apply(&a("10")), a("01"));
        assert!(derive_descriptor(&a("11"), &a("11"), &all).is_err());
    }

    fn omega_admits(engine: &EntailsEngine, nu: &Assignment) -> bool {
        extension_exists(engine.omega_clauses().unwrap(), engine.omega_num_vars(), nu)
    }

    #[test]
    fn refinement_with_single_variable_keeps_counterexample() {
        let phi = cnf(2, &[&[-1, 2]]);
        let cfg = EntailsConfig {
            record_omega: true,
            ..EntailsConfig::default()
        };
        let mut e = EntailsEngine::new(
            &phi,
            &parse_query("!2").unwrap(),
            &Partition::all_min(2),
            cfg,
        )
        .unwrap();
        assert!(omega_admits(&e, &a("11")));
        e.refine(FlipDescriptor::plain(var_set([2]))).unwrap();
        // ((¬x ∨ y) ∧ y) → ¬x is not a tautology: {x¹, y¹} remains.
        assert!(omega_admits(&e, &a("11")));
        assert!(!omega_admits(&e, &a("01")));
        assert!(matches!(
            e.refine(FlipDescriptor::plain(var_set([2]))),
            Err(EngineError::DuplicateDescriptor(_))
        ));
        e.refine(FlipDescriptor::plain(var_set([1, 2]))).unwrap();
        assert!(!omega_admits(&e, &a("11")));
        assert!(e.run().unwrap().verdict.is_entailed());
    }

    #[test]
    fn refinement_with_full_set_makes_omega_unsat() {
        let phi = cnf(2, &[&[-1, 2]]);
        let cfg = EntailsConfig {
            record_omega: true,
            ..EntailsConfig::default()
        };
        let mut e = EntailsEngine::new(
            &phi,
            &parse_query("!2").unwrap(),
            &Partition::all_min(2),
            cfg,
        )
        .unwrap();
        e.refine(FlipDescriptor::plain(var_set([1, 2]))).unwrap();
        for bits in 0..4 {
            assert!(!omega_admits(&e, &Assignment::from_bits(2, bits)));
        }
        let r = e.run().unwrap();
        assert_eq!(
            r.verdict,
            Verdict::Entailed {
                certificate: vec![FlipDescriptor::plain(var_set([1, 2]))]
            }
        );
    }

    #[test]
    fn refinement_excludes_exactly_covered_assignments() {
        // ω after refinement = ω before ∧ ¬covers(d).
        let phi = cnf(4, &[&[1, 2, -3], &[-1, 4], &[2, 3, 4]]);
        let psi = parse_query("!4 | !2").unwrap();
        let part = Partition::from_sets(4, &var_set([1, 2]), &var_set([3]), &var_set([4])).unwrap();
        let cfg = EntailsConfig {
            record_omega: true,
            ..EntailsConfig::default()
        };
        let mut e = EntailsEngine::new(&phi, &psi, &part, cfg).unwrap();
        let d = FlipDescriptor {
            to_zero: var_set([1]),
            varying_to_zero: VarSet::new(),
            varying_to_one: var_set([4]),
        };
        let before: Vec<bool> = (0..16)
            .map(|b| omega_admits(&e, &Assignment::from_bits(4, b)))
            .collect();
        e.refine(d.clone()).unwrap();
        for b in 0..16 {
            let nu = Assignment::from_bits(4, b);
            assert_eq!(
                omega_admits(&e, &nu),
                before[b as usize] && !d.covers(&phi, &nu),
                "{nu:?}"
            );
        }
    }

    #[test]
    fn encodings_and_polarities_agree() {
        let phi = cnf(4, &[&[1, 2], &[3, 4], &[-1, -3]]);
        let psi = parse_query("!1 | !4").unwrap();
        let mut verdicts = Vec::new();
        for encoding in [Encoding::Shared, Encoding::Naive] {
            for polarity in [
                PolarityPolicy::Heuristic,
                PolarityPolicy::Fixed(Polarity::PreferFalse),
                PolarityPolicy::Fixed(Polarity::PreferTrue),
                PolarityPolicy::Fixed(Polarity::Default),
            ] {
                for backend in [BackendKind::Cdcl, BackendKind::Backtrack] {
                    let cfg = EntailsConfig {
                        encoding,
                        polarity,
                        backend,
                        ..EntailsConfig::default()
                    };
                    let r = entails_min(&phi, &psi, &Partition::all_min(4), &cfg).unwrap();
                    verdicts.push(r.verdict.decided());
                }
            }
        }
        assert!(verdicts.iter().all(|v| *v == verdicts[0]), "{verdicts:?}");
    }
}
