//! Clause encodings of the negation of a formula.
//!
//! For CNF input every clause `c` gets a representative `r_c` defined by
//! `¬r_c ∨ c` and `¬l ∨ r_c` for each `l ∈ c`, and the disjunction of all
//! `¬r_c` asserts that some clause is false. Query expressions use a
//! polarity-aware structural encoding: only the implications needed for the
//! polarity in which a subformula occurs are emitted.

use super::{BoolExpr, Clause, CnfFormula, Lit, Var};

/// Source of variables above every variable already in use.
pub trait FreshVars {
    fn fresh(&mut self) -> Var;
}

/// Monotone counter that starts right above a universe.
#[derive(Clone, Debug)]
pub struct FreshCounter {
    next: u32,
}

impl FreshCounter {
    pub fn above(universe: u32) -> FreshCounter {
        FreshCounter { next: universe + 1 }
    }

    /// Variables handed out so far end strictly below this index.
    pub fn next_index(&self) -> u32 {
        self.next
    }
}

impl FreshVars for FreshCounter {
    fn fresh(&mut self) -> Var {
        let v = Var::new(self.next);
        self.next += 1;
        v
    }
}

/// Clauses whose models, projected to the input's variables, are exactly
/// the non-models of the input.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TseitinNegation {
    pub clauses: Vec<Clause>,
    /// Representative per input clause (CNF input) or per defined
    /// subformula (expression input), in allocation order.
    pub representatives: Vec<Var>,
}

fn clause(lits: impl IntoIterator<Item = Lit>) -> Clause {
    Clause::new(lits).expect("encoding clauses mention each variable once")
}

/// Definition clauses `¬r ∨ c` and `¬l ∨ r` tying `r` to clause `c`.
pub(crate) fn clause_definition(c: &Clause, r: Var) -> impl Iterator<Item = Clause> + '_ {
    std::iter::once(clause(
        std::iter::once(r.negative()).chain(c.lits().iter().copied()),
    ))
    .chain(c.lits().iter().map(move |&l| clause([!l, r.positive()])))
}

pub fn tseitin_negation_cnf(f: &CnfFormula, fresh: &mut impl FreshVars) -> TseitinNegation {
    let mut out = TseitinNegation::default();
    for c in f.clauses() {
        let r = fresh.fresh();
        out.clauses.extend(clause_definition(c, r));
        out.representatives.push(r);
    }
    out.clauses
        .push(clause(out.representatives.iter().map(|r| r.negative())));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Term {
    Const(bool),
    Lit(Lit),
}

impl std::ops::Not for Term {
    type Output = Term;

    fn not(self) -> Term {
        match self {
            Term::Const(b) => Term::Const(!b),
            Term::Lit(l) => Term::Lit(!l),
        }
    }
}

struct Encoder<'a, F> {
    fresh: &'a mut F,
    out: &'a mut TseitinNegation,
}

impl<F: FreshVars> Encoder<'_, F> {
    fn define(&mut self) -> Var {
        let t = self.fresh.fresh();
        self.out.representatives.push(t);
        t
    }

    fn emit(&mut self, lits: impl IntoIterator<Item = Lit>) {
        // Child terms may repeat or clash, e.g. `1 & !1`.
        if let Some(c) = Clause::new(lits) {
            self.out.clauses.push(c);
        }
    }

    /// Returns a term `t` with `t → e` when `pos` and `e → t` when `neg`.
    fn encode(&mut self, e: &BoolExpr, pos: bool, neg: bool) -> Term {
        match e {
            BoolExpr::Var(v) => Term::Lit(v.positive()),
            BoolExpr::Const(b) => Term::Const(*b),
            BoolExpr::Not(a) => !self.encode(a, neg, pos),
            BoolExpr::And(cs) => {
                let terms: Vec<Term> = cs.iter().map(|c| self.encode(c, pos, neg)).collect();
                self.junction(terms, true, pos, neg)
            }
            BoolExpr::Or(cs) => {
                let terms: Vec<Term> = cs.iter().map(|c| self.encode(c, pos, neg)).collect();
                self.junction(terms, false, pos, neg)
            }
            BoolExpr::Implies(a, b) => {
                let ta = !self.encode(a, neg, pos);
                let tb = self.encode(b, pos, neg);
                self.junction(vec![ta, tb], false, pos, neg)
            }
            BoolExpr::Iff(a, b) => {
                let ta = self.encode(a, true, true);
                let tb = self.encode(b, true, true);
                match (ta, tb) {
                    (Term::Const(x), t) | (t, Term::Const(x)) => {
                        if x {
                            t
                        } else {
                            !t
                        }
                    }
                    (Term::Lit(la), Term::Lit(lb)) => {
                        if la == lb {
                            return Term::Const(true);
                        }
                        if la == !lb {
                            return Term::Const(false);
                        }
                        let t = self.define();
                        if pos {
                            self.emit([t.negative(), !la, lb]);
                            self.emit([t.negative(), la, !lb]);
                        }
                        if neg {
                            self.emit([t.positive(), la, lb]);
                            self.emit([t.positive(), !la, !lb]);
                        }
                        Term::Lit(t.positive())
                    }
                }
            }
        }
    }

    /// Conjunction (`is_and`) or disjunction of already encoded terms.
    fn junction(&mut self, terms: Vec<Term>, is_and: bool, pos: bool, neg: bool) -> Term {
        // The absorbing constant for And is 0, for Or it is 1.
        let absorbing = !is_and;
        let mut lits = Vec::with_capacity(terms.len());
        for t in terms {
            match t {
                Term::Const(b) if b == absorbing => return Term::Const(absorbing),
                Term::Const(_) => {}
                Term::Lit(l) => lits.push(l),
            }
        }
        lits.sort_unstable();
        lits.dedup();
        match lits.len() {
            0 => return Term::Const(!absorbing),
            1 => return Term::Lit(lits[0]),
            _ => {}
        }
        if lits.windows(2).any(|w| w[0] == !w[1]) {
            return Term::Const(absorbing);
        }
        let t = self.define();
        if is_and {
            if pos {
                for &l in &lits {
                    self.emit([t.negative(), l]);
                }
            }
            if neg {
                self.emit(std::iter::once(t.positive()).chain(lits.iter().map(|&l| !l)));
            }
        } else {
            if pos {
                self.emit(std::iter::once(t.negative()).chain(lits.iter().copied()));
            }
            if neg {
                for &l in &lits {
                    self.emit([t.positive(), !l]);
                }
            }
        }
        Term::Lit(t.positive())
    }
}

/// Encodes `¬f` for a query expression.
pub fn tseitin_negation_expr(f: &BoolExpr, fresh: &mut impl FreshVars) -> TseitinNegation {
    let mut out = TseitinNegation::default();
    let root = Encoder {
        fresh,
        out: &mut out,
    }
    .encode(f, false, true);
    match root {
        Term::Const(true) => out.clauses.push(Clause::empty()),
        Term::Const(false) => {}
        Term::Lit(l) => out.clauses.push(Clause::unit(!l)),
    }
    out
}
