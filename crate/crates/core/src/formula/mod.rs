//! Propositional data model: variables, literals, clauses, CNF formulas,
//! query expressions, assignments and variable partitions.
//!
//! Variables are 1-based. A [`CnfFormula`] carries its universe size, so an
//! assignment over the universe can be checked against it and projected back
//! after fresh (Tseitin or selector) variables have been allocated above it.

mod constraint;
mod dimacs;
mod partition;
mod query;
mod tseitin;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use constraint::smaller_model_constraint;
pub use dimacs::{parse_dimacs, read_dimacs, DimacsParse};
pub use partition::{parse_partition, Partition, Role};
pub use query::{parse_query, BoolExpr};
pub(crate) use tseitin::clause_definition;
pub use tseitin::{
    tseitin_negation_cnf, tseitin_negation_expr, FreshCounter, FreshVars, TseitinNegation,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("line {line}: {message}")]
    Dimacs { line: usize, message: String },
    #[error("query syntax error at position {position}: {message}")]
    Query { position: usize, message: String },
    #[error("partition line {line}: {message}")]
    Partition { line: usize, message: String },
    #[error("variable {var} outside universe of {universe} variables")]
    VarOutOfRange { var: u32, universe: u32 },
    #[error("variable {0} is substituted by both 0 and 1")]
    OverlappingSubstitution(u32),
    #[error("{0}")]
    Precondition(String),
}

/// A propositional variable, 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var(u32);

impl Var {
    /// Panics on index 0.
    pub fn new(index: u32) -> Var {
        assert!(index >= 1, "variable indices are 1-based");
        Var(index)
    }

    pub fn try_new(index: u32) -> Option<Var> {
        (index >= 1).then_some(Var(index))
    }

    /// The 1-based DIMACS index.
    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// 0-based position for dense arrays.
    #[inline]
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    #[inline]
    pub fn from_index(index: usize) -> Var {
        Var(index as u32 + 1)
    }

    #[inline]
    pub fn positive(self) -> Lit {
        Lit::new(self, true)
    }

    #[inline]
    pub fn negative(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type VarSet = BTreeSet<Var>;

/// A possibly negated variable. Encoded as `2 * (var - 1) + negated`, so a
/// literal and its complement are adjacent when sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(((var.0 - 1) << 1) | u32::from(!positive))
    }

    /// Panics on 0.
    pub fn from_dimacs(value: i64) -> Lit {
        assert!(value != 0, "0 is not a literal");
        Lit::new(Var::new(value.unsigned_abs() as u32), value > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var().0);
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    #[inline]
    pub fn var(self) -> Var {
        Var((self.0 >> 1) + 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense code usable as an array index.
    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_code(code: usize) -> Lit {
        Lit(code as u32)
    }

    /// Truth value of this literal under `nu`.
    #[inline]
    pub fn eval(self, nu: &Assignment) -> bool {
        nu.get(self.var()) == self.is_positive()
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals: sorted, duplicate-free and never tautological.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    /// Builds a clause, removing duplicate literals. Returns `None` when the
    /// literals contain a complementary pair.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Option<Clause> {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return None;
        }
        Some(Clause { lits })
    }

    pub fn empty() -> Clause {
        Clause { lits: Vec::new() }
    }

    pub fn unit(lit: Lit) -> Clause {
        Clause { lits: vec![lit] }
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    /// True when every literal is positive (the empty clause included).
    pub fn is_positive(&self) -> bool {
        self.lits.iter().all(|l| l.is_positive())
    }

    pub fn max_var(&self) -> Option<Var> {
        self.lits.iter().map(|l| l.var()).max()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn eval(&self, nu: &Assignment) -> bool {
        self.lits.iter().any(|&l| l.eval(nu))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lits {
            write!(f, "{l} ")?;
        }
        write!(f, "0")
    }
}

/// Conjunction of clauses over the variables `1..=num_vars`.
///
/// The empty clause set is constant-true; a formula containing the empty
/// clause is constant-false.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CnfFormula {
    clauses: Vec<Clause>,
    num_vars: u32,
}

impl CnfFormula {
    pub fn new(num_vars: u32) -> CnfFormula {
        CnfFormula {
            clauses: Vec::new(),
            num_vars,
        }
    }

    /// Builds a formula from DIMACS-style integer clauses. Tautologies are
    /// dropped.
    pub fn from_dimacs_clauses(
        num_vars: u32,
        clauses: &[&[i64]],
    ) -> Result<CnfFormula, FormulaError> {
        let mut f = CnfFormula::new(num_vars);
        for c in clauses {
            f.add_lits(c.iter().map(|&v| Lit::from_dimacs(v)))?;
        }
        Ok(f)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (1..=self.num_vars).map(Var)
    }

    pub fn add_clause(&mut self, clause: Clause) -> Result<(), FormulaError> {
        if let Some(v) = clause.max_var() {
            if v.0 > self.num_vars {
                return Err(FormulaError::VarOutOfRange {
                    var: v.0,
                    universe: self.num_vars,
                });
            }
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// Adds a clause from raw literals; returns `false` when it was a
    /// tautology and therefore dropped.
    pub fn add_lits(&mut self, lits: impl IntoIterator<Item = Lit>) -> Result<bool, FormulaError> {
        match Clause::new(lits) {
            Some(c) => self.add_clause(c).map(|_| true),
            None => Ok(false),
        }
    }

    pub fn is_trivially_true(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn is_trivially_false(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty)
    }

    /// Grows the universe; never shrinks it.
    pub fn extend_universe(&mut self, num_vars: u32) {
        self.num_vars = self.num_vars.max(num_vars);
    }

    pub fn extended(&self, num_vars: u32) -> CnfFormula {
        let mut f = self.clone();
        f.extend_universe(num_vars);
        f
    }

    /// `self ∧ ¬x` for every `x` in `vars`.
    pub fn with_negative_units(
        &self,
        vars: impl IntoIterator<Item = Var>,
    ) -> Result<CnfFormula, FormulaError> {
        let mut f = self.clone();
        for v in vars {
            f.add_clause(Clause::unit(v.negative()))?;
        }
        Ok(f)
    }

    pub fn evaluate(&self, nu: &Assignment) -> Result<bool, FormulaError> {
        if nu.len() < self.num_vars as usize {
            if let Some(v) = self.clauses.iter().filter_map(Clause::max_var).max() {
                if v.index() >= nu.len() {
                    return Err(FormulaError::VarOutOfRange {
                        var: v.0,
                        universe: nu.len() as u32,
                    });
                }
            }
        }
        Ok(self.clauses.iter().all(|c| c.eval(nu)))
    }

    /// Computes `φ[zeros ↦ 0, ones ↦ 1]`: satisfied clauses are removed and
    /// falsified literals deleted. The universe is unchanged.
    pub fn substitute(&self, zeros: &VarSet, ones: &VarSet) -> Result<CnfFormula, FormulaError> {
        if let Some(v) = zeros.intersection(ones).next() {
            return Err(FormulaError::OverlappingSubstitution(v.0));
        }
        let mut fixed = vec![None; self.num_vars as usize];
        for (set, value) in [(zeros, false), (ones, true)] {
            for v in set {
                if v.0 > self.num_vars {
                    return Err(FormulaError::VarOutOfRange {
                        var: v.0,
                        universe: self.num_vars,
                    });
                }
                fixed[v.index()] = Some(value);
            }
        }
        Ok(self.substitute_with(|v| fixed[v.index()]))
    }

    /// Substitution driven by a lookup from variable to fixed value.
    pub fn substitute_with(&self, fixed: impl Fn(Var) -> Option<bool>) -> CnfFormula {
        let mut out = CnfFormula::new(self.num_vars);
        'clauses: for c in &self.clauses {
            let mut kept = Vec::with_capacity(c.len());
            for &l in c.lits() {
                match fixed(l.var()) {
                    Some(value) if value == l.is_positive() => continue 'clauses,
                    Some(_) => {}
                    None => kept.push(l),
                }
            }
            // Literals stay sorted and complement-free.
            out.clauses.push(Clause { lits: kept });
        }
        out
    }

    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            s.push_str(&c.to_string());
            s.push('\n');
        }
        s
    }
}

/// A total map from the variables `1..=len` to {0, 1}.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn zeros(len: usize) -> Assignment {
        Assignment {
            values: vec![false; len],
        }
    }

    pub fn from_values(values: Vec<bool>) -> Assignment {
        Assignment { values }
    }

    /// Bit `i` of `bits` gives the value of variable `i + 1`.
    pub fn from_bits(len: usize, bits: u64) -> Assignment {
        Assignment {
            values: (0..len).map(|i| bits >> i & 1 == 1).collect(),
        }
    }

    /// Builds an assignment from a `0/1` string, first character is variable 1.
    pub fn from_str01(s: &str) -> Assignment {
        Assignment {
            values: s.chars().map(|c| c == '1').collect(),
        }
    }

    pub fn to_bits(&self) -> u64 {
        debug_assert!(self.values.len() <= 64);
        self.values
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Panics when `v` is outside the universe.
    #[inline]
    pub fn get(&self, v: Var) -> bool {
        self.values[v.index()]
    }

    pub fn try_get(&self, v: Var) -> Result<bool, FormulaError> {
        self.values
            .get(v.index())
            .copied()
            .ok_or(FormulaError::VarOutOfRange {
                var: v.0,
                universe: self.values.len() as u32,
            })
    }

    pub fn set(&mut self, v: Var, value: bool) {
        self.values[v.index()] = value;
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (1..=self.values.len() as u32).map(Var)
    }

    pub fn ones(&self) -> impl Iterator<Item = Var> + '_ {
        self.vars().filter(|&v| self.get(v))
    }

    pub fn zeros_iter(&self) -> impl Iterator<Item = Var> + '_ {
        self.vars().filter(|&v| !self.get(v))
    }

    /// Restriction to the first `len` variables.
    pub fn project(&self, len: usize) -> Assignment {
        Assignment {
            values: self.values[..len.min(self.values.len())].to_vec(),
        }
    }

    /// The same assignment with `zeros` set to 0 and `ones` set to 1.
    pub fn overridden(&self, zeros: &VarSet, ones: &VarSet) -> Assignment {
        let mut a = self.clone();
        for &v in zeros {
            a.set(v, false);
        }
        for &v in ones {
            a.set(v, true);
        }
        a
    }

    /// Literals in DIMACS order, e.g. `-1 2`.
    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.vars().map(|v| Lit::new(v, self.get(v)))
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, &b) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}^{}", i + 1, u8::from(b))?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for l in self.lits() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Something that evaluates under an assignment.
pub trait Evaluate {
    fn evaluate(&self, nu: &Assignment) -> Result<bool, FormulaError>;
}

impl Evaluate for CnfFormula {
    fn evaluate(&self, nu: &Assignment) -> Result<bool, FormulaError> {
        CnfFormula::evaluate(self, nu)
    }
}

impl Evaluate for BoolExpr {
    fn evaluate(&self, nu: &Assignment) -> Result<bool, FormulaError> {
        BoolExpr::evaluate(self, nu)
    }
}

/// `evaluate(ν, f)` for either a CNF formula or a query expression.
pub fn evaluate<F: Evaluate + ?Sized>(nu: &Assignment, f: &F) -> Result<bool, FormulaError> {
    f.evaluate(nu)
}

pub fn var_set(indices: impl IntoIterator<Item = u32>) -> VarSet {
    indices.into_iter().map(Var::new).collect()
}
