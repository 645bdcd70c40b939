use super::{Assignment, Clause, CnfFormula, FormulaError, Lit, Partition, Role, Var};

/// Constraint whose conjunction with `φ` has exactly the models of `φ` that
/// are strictly below `nu` in the `(P,Z)` ordering of `part`.
///
/// Minimized variables that are 0 in `nu` stay 0 and at least one that is 1
/// must drop to 0; fixed variables keep their value; varying ones are free.
/// With `force_zero`, the "at least one drops" clause is replaced by the
/// unit `¬force_zero`. When no minimized variable is 1 and no `force_zero`
/// is given the constraint contains the empty clause.
pub fn smaller_model_constraint(
    nu: &Assignment,
    part: &Partition,
    force_zero: Option<Var>,
) -> Result<CnfFormula, FormulaError> {
    let n = nu.len() as u32;
    if let Some(x) = force_zero {
        if x.get() > n || !nu.get(x) || part.role(x) != Role::Min {
            return Err(FormulaError::Precondition(format!(
                "forced variable {x} must be minimized and true in the reference assignment"
            )));
        }
    }
    let mut out = CnfFormula::new(n);
    let mut strict = Vec::new();
    for v in nu.vars() {
        let value = nu.get(v);
        match part.role(v) {
            Role::Min if value => strict.push(v.negative()),
            Role::Min => out.add_clause(Clause::unit(v.negative()))?,
            Role::Fixed => out.add_clause(Clause::unit(Lit::new(v, value)))?,
            Role::Varying => {}
        }
    }
    match force_zero {
        Some(x) => out.add_clause(Clause::unit(x.negative()))?,
        None => out.add_clause(Clause::new(strict).expect("distinct negative literals"))?,
    }
    Ok(out)
}
