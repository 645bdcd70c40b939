//! Brute-force reference implementations for small universes.
//!
//! Everything here enumerates assignments as bitmasks, bit `i` standing for
//! variable `i + 1`. Results are returned in lexicographic order of the
//! assignment strings.

use thiserror::Error;

use crate::formula::{Assignment, BoolExpr, CnfFormula, FormulaError, Partition, Role, Var, VarSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("universe of {universe} variables exceeds the enumeration limit of {limit}")]
    TooLarge { universe: u32, limit: u32 },
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("{0}")]
    Precondition(String),
}

/// Largest universe an enumeration accepts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumLimit {
    pub max_universe: u32,
}

impl EnumLimit {
    pub const MODELS: EnumLimit = EnumLimit { max_universe: 16 };
    pub const MINIMAL: EnumLimit = EnumLimit { max_universe: 10 };
    pub const GCWA: EnumLimit = EnumLimit { max_universe: 8 };

    fn check(self, universe: u32) -> Result<(), OracleError> {
        if universe > self.max_universe {
            return Err(OracleError::TooLarge {
                universe,
                limit: self.max_universe,
            });
        }
        Ok(())
    }
}

impl Default for EnumLimit {
    fn default() -> Self {
        EnumLimit::MODELS
    }
}

/// A clause as a pair of literal masks.
#[derive(Clone, Copy)]
struct MaskClause {
    pos: u64,
    neg: u64,
}

impl MaskClause {
    fn holds(self, m: u64) -> bool {
        m & self.pos != 0 || !m & self.neg != 0
    }
}

struct Masks {
    clauses: Vec<MaskClause>,
}

impl Masks {
    fn new(phi: &CnfFormula) -> Masks {
        let clauses = phi
            .clauses()
            .iter()
            .map(|c| {
                let mut mc = MaskClause { pos: 0, neg: 0 };
                for l in c.lits() {
                    let bit = 1u64 << l.var().index();
                    if l.is_positive() {
                        mc.pos |= bit;
                    } else {
                        mc.neg |= bit;
                    }
                }
                mc
            })
            .collect();
        Masks { clauses }
    }

    fn holds(&self, m: u64) -> bool {
        self.clauses.iter().all(|c| c.holds(m))
    }

    fn models(&self, universe: u32) -> Vec<u64> {
        (0..1u64 << universe).filter(|&m| self.holds(m)).collect()
    }
}

fn mask_of(vars: impl IntoIterator<Item = Var>) -> u64 {
    vars.into_iter().fold(0, |m, v| m | 1 << v.index())
}

/// `(P, Q)` masks of a partition over `universe` variables.
fn order_masks(part: &Partition, universe: u32) -> (u64, u64) {
    let part = part.extended(universe);
    (
        mask_of(part.vars_with(Role::Min)),
        mask_of(part.vars_with(Role::Fixed)),
    )
}

/// `a <_(P,Z) b` on masks.
fn mask_less(a: u64, b: u64, p: u64, q: u64) -> bool {
    a & q == b & q && a & p & !b == 0 && a & p != b & p
}

fn to_assignments(universe: u32, mut masks: Vec<u64>) -> Vec<Assignment> {
    let mut out: Vec<Assignment> = masks.drain(..).map(|m| Assignment::from_bits(universe as usize, m)).collect();
    out.sort();
    out
}

fn minimal_masks(phi: &CnfFormula, part: &Partition, universe: u32) -> Vec<u64> {
    let models = Masks::new(phi).models(universe);
    let (p, q) = order_masks(part, universe);
    models
        .iter()
        .copied()
        .filter(|&m| !models.iter().any(|&o| mask_less(o, m, p, q)))
        .collect()
}

/// Satisfying assignments of `φ` over its declared universe.
pub fn all_models(phi: &CnfFormula) -> Result<Vec<Assignment>, OracleError> {
    EnumLimit::MODELS.check(phi.num_vars())?;
    Ok(to_assignments(phi.num_vars(), Masks::new(phi).models(phi.num_vars())))
}

/// Models of `φ` with no model strictly below them in the partition order.
/// The universe is the larger of `φ`'s and the partition's.
pub fn minimal_models(phi: &CnfFormula, part: &Partition) -> Result<Vec<Assignment>, OracleError> {
    let universe = phi.num_vars().max(part.len() as u32);
    EnumLimit::MINIMAL.check(universe)?;
    Ok(to_assignments(universe, minimal_masks(phi, part, universe)))
}

/// `ψ` holds in every minimal model of `φ`. Variables of `ψ` beyond `φ`'s
/// universe are minimized.
pub fn entails_min_bf(phi: &CnfFormula, psi: &BoolExpr, part: &Partition) -> Result<bool, OracleError> {
    let universe = phi.num_vars().max(part.len() as u32).max(psi.max_var());
    EnumLimit::MINIMAL.check(universe)?;
    for m in minimal_masks(phi, part, universe) {
        if !psi.evaluate(&Assignment::from_bits(universe as usize, m))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Variables that are 0 in every minimal model.
pub fn ffn_bf(phi: &CnfFormula) -> Result<VarSet, OracleError> {
    let universe = phi.num_vars();
    EnumLimit::MINIMAL.check(universe)?;
    let ones = minimal_masks(phi, &Partition::all_min(universe), universe)
        .into_iter()
        .fold(0u64, |acc, m| acc | m);
    Ok((1..=universe).map(Var::new).filter(|v| ones & 1 << v.index() == 0).collect())
}

/// The closed-world definition read literally: `x` is free for negation iff
/// for every positive clause `B` with `φ ⊭ B` also `φ ⊭ B ∨ x`. The case
/// without `B` is checked as `φ ⊭ x` whenever `φ` is satisfiable.
pub fn gcwa_free_check_bf(phi: &CnfFormula, x: Var) -> Result<bool, OracleError> {
    let universe = phi.num_vars();
    EnumLimit::GCWA.check(universe)?;
    if x.get() > universe {
        return Err(OracleError::Precondition(format!("variable {x} outside the universe")));
    }
    let models = Masks::new(phi).models(universe);
    let xbit = 1u64 << x.index();
    // φ ⊭ B iff some model falsifies every variable in B.
    let not_entailed = |b: u64| models.iter().any(|&m| m & b == 0);
    if !models.is_empty() && !not_entailed(xbit) {
        return Ok(false);
    }
    for b in 1..1u64 << universe {
        if not_entailed(b) && !not_entailed(b | xbit) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the model `ν` of `φ` has no model strictly below it.
pub fn is_minimal_model(phi: &CnfFormula, nu: &Assignment, part: &Partition) -> Result<bool, OracleError> {
    let universe = phi.num_vars().max(part.len() as u32).max(nu.len() as u32);
    EnumLimit::MINIMAL.check(universe)?;
    let mut values = nu.values().to_vec();
    values.resize(universe as usize, false);
    let nu = Assignment::from_values(values);
    if !phi.extended(universe).evaluate(&nu)? {
        return Err(OracleError::Precondition(format!("{nu:?} is not a model")));
    }
    let target = nu.to_bits();
    let (p, q) = order_masks(part, universe);
    let masks = Masks::new(phi);
    Ok(!(0..1u64 << universe).any(|m| mask_less(m, target, p, q) && masks.holds(m)))
}
